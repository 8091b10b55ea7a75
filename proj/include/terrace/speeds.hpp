#pragma once

#include "terrace/io.hpp"
#include "terrace/model.hpp"
#include "terrace/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace terrace {

/// Open interval (lo, hi); empty when lo >= hi or either bound is NaN.
struct Interval {
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();

    bool empty() const { return !(lo < hi); }
    bool contains(double x) const { return !empty() && lo < x && x < hi; }
    double width() const { return empty() ? 0.0 : hi - lo; }

    static Interval none() { return {}; }
    Interval intersect(const Interval& o) const {
        if (empty() || o.empty()) {
            return none();
        }
        const Interval r{std::max(lo, o.lo), std::min(hi, o.hi)};
        return r.empty() ? none() : r;
    }
};

/// Which growth term enters the first leading-edge inequality for kappa1.
/// `alpha2` is the default; `alpha1` is the alternative reading kept for comparison.
enum class CouplingVariant { alpha2, alpha1 };

namespace speeds_detail {

/// Open root interval of a x^2 - b x + c < 0 (a > 0).
inline Interval sublevel(double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    if (!(disc > 0.0)) {
        return Interval::none();
    }
    const double s = std::sqrt(disc);
    // stable root pair
    const double q = 0.5 * (b + std::copysign(s, b));
    double r1 = q / a;
    double r2 = q != 0.0 ? c / q : -r1;
    if (r1 > r2) {
        std::swap(r1, r2);
    }
    return {r1, r2};
}

inline double growth(const ModelParams& p, CouplingVariant v) {
    return 1.0 + (v == CouplingVariant::alpha2 ? p.alpha2 : p.alpha1);
}

}  // namespace speeds_detail

// Left-hand sides of the four strict inequalities; a certificate needs all of them < 0.
inline double lhs_1a_first(double k1, double c1, const ModelParams& p,
                           CouplingVariant v = CouplingVariant::alpha2) {
    return k1 * k1 - c1 * k1 + speeds_detail::growth(p, v);
}
inline double lhs_1a_second(double k1, double c1, const ModelParams& p) { return p.d * k1 * k1 - c1 * k1 - p.r; }
inline double lhs_1b(double k2, double c2, const ModelParams& p) { return p.d * k2 * k2 - c2 * k2 + p.r; }
inline double lhs_1c(double k1, double k2, double c1, double c2, const ModelParams& p) {
    return lhs_1b(k2, c2, p) + k1 * (c2 - c1);
}

inline Interval kappa1_interval(double c1, const ModelParams& p, CouplingVariant v = CouplingVariant::alpha2) {
    const Interval a = speeds_detail::sublevel(1.0, c1, speeds_detail::growth(p, v));
    const Interval b = speeds_detail::sublevel(p.d, c1, -p.r);
    return a.intersect(b);
}

inline Interval kappa2_interval(double c2, const ModelParams& p) { return speeds_detail::sublevel(p.d, c2, p.r); }

enum class SpeedFailure { none, ineq_1a, ineq_1b, ineq_1c };

inline const char* to_string(SpeedFailure f) {
    switch (f) {
        case SpeedFailure::none: return "none";
        case SpeedFailure::ineq_1a: return "1a";
        case SpeedFailure::ineq_1b: return "1b";
        default: return "1c";
    }
}

/// (c1, c2, kappa1, kappa2) with the margins of the leading-edge inequalities.
/// When infeasible, `failed` names the first failing inequality and `fail_margin` its
/// (non-negative) best value; rates that could not be chosen are NaN.
struct SpeedCertificate {
    double c1 = 0.0;
    double c2 = 0.0;
    double kappa1 = std::numeric_limits<double>::quiet_NaN();
    double kappa2 = std::numeric_limits<double>::quiet_NaN();
    double margin_1a_first = std::numeric_limits<double>::quiet_NaN();
    double margin_1a_second = std::numeric_limits<double>::quiet_NaN();
    double margin_1b = std::numeric_limits<double>::quiet_NaN();
    double margin_1c = std::numeric_limits<double>::quiet_NaN();
    SpeedFailure failed = SpeedFailure::none;
    double fail_margin = 0.0;

    bool feasible() const { return failed == SpeedFailure::none; }
    double margin_1a() const { return std::max(margin_1a_first, margin_1a_second); }

    std::string describe() const {
        std::ostringstream os;
        if (feasible()) {
            os << "feasible: c1=" << c1 << " c2=" << c2 << " kappa1=" << kappa1 << " kappa2=" << kappa2
               << " margins(1a)=" << margin_1a() << " (1b)=" << margin_1b << " (1c)=" << margin_1c;
        } else {
            os << "infeasible at (" << to_string(failed) << ") with margin +" << fail_margin << " (c1=" << c1
               << ", c2=" << c2 << ")";
        }
        return os.str();
    }
};

inline void fill_margins(SpeedCertificate& s, const ModelParams& p, CouplingVariant v) {
    s.margin_1a_first = lhs_1a_first(s.kappa1, s.c1, p, v);
    s.margin_1a_second = lhs_1a_second(s.kappa1, s.c1, p);
    s.margin_1b = lhs_1b(s.kappa2, s.c2, p);
    s.margin_1c = lhs_1c(s.kappa1, s.kappa2, s.c1, s.c2, p);
}

inline constexpr double kKappaNudge = 1e-6;

/// Smallest achievable value over kappa > 0 of max(lhs_1a_first, lhs_1a_second).
/// Convex in kappa, so golden-section search on [0, c1] suffices.
inline double best_1a(double c1, const ModelParams& p, CouplingVariant v) {
    auto f = [&](double k) { return std::max(lhs_1a_first(k, c1, p, v), lhs_1a_second(k, c1, p)); };
    double a = 0.0, b = std::max(c1, 1.0);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 200; ++i) {
        const double x1 = b - g * (b - a), x2 = a + g * (b - a);
        if (f(x1) < f(x2)) {
            b = x2;
        } else {
            a = x1;
        }
    }
    return f(0.5 * (a + b));
}

/// Certificate for the speed pair (c1, c2).
///
/// kappa1 defaults to the infimum of its interval plus 1e-6 (the 1c left side increases
/// with kappa1); kappa2 sits at the minimizer c2/(2d) of the 1b/1c quadratics, clamped
/// into kappa2_interval.
inline SpeedCertificate certificate(double c1, double c2, const ModelParams& p,
                                    std::optional<double> kappa1 = std::nullopt,
                                    CouplingVariant variant = CouplingVariant::alpha2) {
    p.validate();
    if (!(c1 < c2)) {
        std::ostringstream os;
        os << "certificate: speeds must satisfy c1 < c2 (got c1=" << c1 << ", c2=" << c2 << ")";
        throw ValidationError(os.str());
    }
    SpeedCertificate s;
    s.c1 = c1;
    s.c2 = c2;
    const Interval i1 = kappa1_interval(c1, p, variant);
    if (kappa1) {
        s.kappa1 = *kappa1;
        const double m = std::max(lhs_1a_first(*kappa1, c1, p, variant), lhs_1a_second(*kappa1, c1, p));
        if (!(m < 0.0)) {
            s.failed = SpeedFailure::ineq_1a;
            s.fail_margin = m;
            return s;
        }
    } else {
        if (i1.empty()) {
            s.failed = SpeedFailure::ineq_1a;
            s.fail_margin = std::max(0.0, best_1a(c1, p, variant));
            return s;
        }
        s.kappa1 = i1.width() > 4.0 * kKappaNudge ? i1.lo + kKappaNudge : 0.5 * (i1.lo + i1.hi);
    }
    const Interval i2 = kappa2_interval(c2, p);
    const double vertex = c2 / (2.0 * p.d);
    if (i2.empty()) {
        s.failed = SpeedFailure::ineq_1b;
        s.fail_margin = std::max(0.0, lhs_1b(vertex, c2, p));
        s.margin_1a_first = lhs_1a_first(s.kappa1, c1, p, variant);
        s.margin_1a_second = lhs_1a_second(s.kappa1, c1, p);
        return s;
    }
    s.kappa2 = std::clamp(vertex, i2.lo, i2.hi);
    fill_margins(s, p, variant);
    if (!(s.margin_1c < 0.0)) {
        s.failed = SpeedFailure::ineq_1c;
        s.fail_margin = s.margin_1c;
        return s;
    }
    // re-check everything by direct evaluation
    if (!(s.margin_1a_first < 0.0 && s.margin_1a_second < 0.0 && s.margin_1b < 0.0)) {
        throw NumericalError("certificate: selected rates fail a direct re-check (" + s.describe() + ")");
    }
    return s;
}

/// Exhaustive sign check over (kappa1, kappa2) in (0, kmax]^2 with the given step.
/// Uses the smallest admissible kappa1 on the grid for 1c, which is exact since the 1c
/// left side increases with kappa1.
inline bool brute_force_feasible(double c1, double c2, const ModelParams& p, double step = 1e-3,
                                 double kmax = 6.0, CouplingVariant v = CouplingVariant::alpha2) {
    const auto n = static_cast<long>(std::floor(kmax / step + 1e-9));
    std::optional<double> k1_best;
    for (long i = 1; i <= n; ++i) {
        const double k = step * static_cast<double>(i);
        if (lhs_1a_first(k, c1, p, v) < 0.0 && lhs_1a_second(k, c1, p) < 0.0) {
            k1_best = k;
            break;
        }
    }
    if (!k1_best) {
        return false;
    }
    for (long j = 1; j <= n; ++j) {
        const double k = step * static_cast<double>(j);
        if (lhs_1b(k, c2, p) < 0.0 && lhs_1c(*k1_best, k, c1, c2, p) < 0.0) {
            return true;
        }
    }
    return false;
}

struct RegionCell {
    double c1 = 0.0;
    double c2 = 0.0;
    bool feasible = false;
    bool fail_1a = false;
    bool fail_1b = false;
    bool fail_1c = false;  // 1a and 1b hold, 1c fails: the interaction-excluded zone
    double kappa1 = std::numeric_limits<double>::quiet_NaN();
    double kappa2 = std::numeric_limits<double>::quiet_NaN();
    double margin_1c = std::numeric_limits<double>::quiet_NaN();
    bool variant_feasible = false;  // verdict with the alternative coupling term
};

struct RegionMap {
    std::vector<double> c1_grid;
    std::vector<double> c2_grid;
    std::vector<RegionCell> cells;  // row-major, c1 rows

    const RegionCell& at(std::size_t i, std::size_t j) const { return cells[i * c2_grid.size() + j]; }
};

inline RegionMap region_scan(const std::vector<double>& c1_grid, const std::vector<double>& c2_grid,
                             const ModelParams& p) {
    p.validate();
    auto ascending = [](const std::vector<double>& g) {
        return !g.empty() && std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
    };
    if (!ascending(c1_grid) || !ascending(c2_grid)) {
        throw ValidationError("region_scan: speed grids must be non-empty and strictly ascending");
    }
    RegionMap m{c1_grid, c2_grid, {}};
    m.cells.reserve(c1_grid.size() * c2_grid.size());
    for (double c1 : c1_grid) {
        const bool ok_1a = !kappa1_interval(c1, p).empty();
        for (double c2 : c2_grid) {
            RegionCell cell;
            cell.c1 = c1;
            cell.c2 = c2;
            const bool ok_1b = !kappa2_interval(c2, p).empty();
            cell.fail_1a = !ok_1a;
            cell.fail_1b = !ok_1b;
            if (c1 < c2) {
                const SpeedCertificate s = certificate(c1, c2, p);
                cell.feasible = s.feasible();
                cell.fail_1c = ok_1a && ok_1b && s.failed == SpeedFailure::ineq_1c;
                if (ok_1a && ok_1b) {
                    cell.kappa1 = s.kappa1;
                    cell.kappa2 = s.kappa2;
                    cell.margin_1c = s.margin_1c;
                }
                cell.variant_feasible = certificate(c1, c2, p, std::nullopt, CouplingVariant::alpha1).feasible();
            }
            m.cells.push_back(cell);
        }
    }
    return m;
}

inline void write_region_csv(std::ostream& os, const RegionMap& m) {
    CsvWriter w(os, {"c1", "c2", "feasible", "fail_1a", "fail_1b", "fail_1c", "kappa1", "kappa2", "margin_1c"});
    for (const auto& c : m.cells) {
        w.cell(c.c1).cell(c.c2).cell(c.feasible).cell(c.fail_1a).cell(c.fail_1b).cell(c.fail_1c);
        w.cell(c.kappa1).cell(c.kappa2).cell(c.margin_1c).end_row();
    }
}

/// Grid points where the alternative coupling term changes the verdict.
inline void write_variant_csv(std::ostream& os, const RegionMap& m) {
    CsvWriter w(os, {"c1", "c2", "feasible", "feasible_alpha1"});
    for (const auto& c : m.cells) {
        if (c.feasible != c.variant_feasible) {
            w.cell(c.c1).cell(c.c2).cell(c.feasible).cell(c.variant_feasible).end_row();
        }
    }
}

inline std::vector<double> linspace_step(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) {
        throw ValidationError("grid needs step > 0 and hi >= lo");
    }
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = lo + step * static_cast<double>(i);
    }
    return g;
}

}  // namespace terrace
