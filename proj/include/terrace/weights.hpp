#pragma once

#include "terrace/fronts.hpp"
#include "terrace/io.hpp"
#include "terrace/model.hpp"
#include "terrace/speeds.hpp"
#include "terrace/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace terrace {

/// Piecewise exponential weight omega = exp(phi) for a two-front superposition.
///
/// Rates and speeds are taken verbatim from the certificate fields, so a weight can also be
/// built from rates that violate the certificate inequalities (for diagnostics).
struct WeightSpec {
    double c1 = 0.0;
    double c2 = 0.0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double psi1 = 0.0;
    double psi2 = 0.0;

    static WeightSpec from(const SpeedCertificate& cert, double psi1, double psi2) {
        WeightSpec w{cert.c1, cert.c2, cert.kappa1, cert.kappa2, psi1, psi2};
        w.validate();
        return w;
    }

    void validate() const {
        std::vector<std::string> problems;
        if (!(c1 < c2)) {
            problems.push_back("c1 < c2 required");
        }
        if (!(kappa1 > 0.0 && kappa2 > 0.0)) {
            problems.push_back("kappa1, kappa2 must be positive");
        }
        // the regions are ordered only when the shifted fronts start at least 2 apart
        if (!(psi2 - psi1 >= 2.0)) {
            problems.push_back("psi2 - psi1 must be at least 2");
        }
        if (!problems.empty()) {
            std::string msg = "weight spec: ";
            for (std::size_t i = 0; i < problems.size(); ++i) {
                msg += (i ? "; " : "") + problems[i];
            }
            throw ValidationError(msg);
        }
    }
};

enum class Region { I1 = 1, I2, I3, I4, I5 };

inline const char* to_string(Region r) {
    static const char* names[] = {"I1", "I2", "I3", "I4", "I5"};
    return names[static_cast<int>(r) - 1];
}

/// Boundary points belong to the closed regions I1, I3, I5.
inline Region classify_region(double t, double x, const WeightSpec& w) {
    const double xi1 = x - w.c1 * t - w.psi1;
    const double xi2 = x - w.c2 * t - w.psi2;
    if (xi1 <= -1.0) {
        return Region::I1;
    }
    if (xi1 < 1.0) {
        return Region::I2;
    }
    if (xi2 <= -1.0) {
        return Region::I3;
    }
    if (xi2 < 1.0) {
        return Region::I4;
    }
    return Region::I5;
}

struct PhiJet {
    double value = 0.0;
    double t = 0.0;
    double x = 0.0;
    double xx = 0.0;
    Region region = Region::I1;
};

inline PhiJet phi(double t, double x, const WeightSpec& w) {
    const double xi1 = x - w.c1 * t - w.psi1;
    const double xi2 = x - w.c2 * t - w.psi2;
    const double k1 = w.kappa1, k2 = w.kappa2;
    PhiJet j;
    j.region = classify_region(t, x, w);
    switch (j.region) {
        case Region::I1:
            break;
        case Region::I2: {
            const double y = xi1 + 1.0;
            j.value = -0.25 * k1 * y * y;
            j.x = -0.5 * k1 * y;
            j.xx = -0.5 * k1;
            j.t = 0.5 * k1 * w.c1 * y;
            break;
        }
        case Region::I3:
            j.value = -k1 * xi1;
            j.x = -k1;
            j.t = k1 * w.c1;
            break;
        case Region::I4: {
            const double y = xi2 + 1.0;
            j.value = -k1 * xi1 - 0.25 * (k2 - k1) * y * y;
            j.x = -k1 - 0.5 * (k2 - k1) * y;
            j.xx = -0.5 * (k2 - k1);
            j.t = k1 * w.c1 + 0.5 * w.c2 * (k2 - k1) * y;
            break;
        }
        case Region::I5:
            // xi1 - xi2 = (c2 - c1) t + psi2 - psi1 carries the offset accumulated across I3, I4
            j.value = -k1 * (xi1 - xi2) - k2 * xi2;
            j.x = -k2;
            j.t = -k1 * (w.c2 - w.c1) + k2 * w.c2;
            break;
    }
    return j;
}

/// J_g(ubar) - phi_t Id + D phi_x^2
inline Matrix2 a0_matrix(double t, double x, const SuperpositionSpec& s, const WeightSpec& w, const ModelParams& p) {
    const PhiJet f = phi(t, x, w);
    const StatePoint u = superpose(s, t, x);
    Matrix2 a = jacobian(u, p);
    a.a11 += -f.t + p.d * f.x * f.x;
    a.a22 += -f.t + f.x * f.x;
    return a;
}

inline void check_consistent(const SuperpositionSpec& s, const WeightSpec& w) {
    if (s.c1 != w.c1 || s.c2 != w.c2 || s.psi1 != w.psi1 || s.psi2 != w.psi2) {
        throw ValidationError("superposition and weight disagree on speeds or shifts");
    }
}

// ---------------------------------------------------------------------------
// Profile placement for the diagonal bound.

/// Position of the first point (from the left) where some component drops below 1.
inline std::optional<double> first_drop_below_one(const FrontProfile& f) {
    std::optional<double> best;
    for (int k = 0; k < 2; ++k) {
        if (f.values.front()[k] < 1.0) {
            return f.xi0;
        }
        if (auto x = level_crossing(f, k, 1.0); x && (!best || *x < *best)) {
            best = x;
        }
    }
    return best;
}

/// Half the slack of dk1^2 - c1 k1 - r + 2 r eps < 0, capped at 0.1.
inline double default_epsilon(const WeightSpec& w, const ModelParams& p) {
    const double slack = -(p.d * w.kappa1 * w.kappa1 - w.c1 * w.kappa1 - p.r);
    if (!(slack > 0.0)) {
        throw ValidationError("weight: d kappa1^2 - c1 kappa1 - r must be negative");
    }
    return std::min(0.1, 0.5 * slack / (2.0 * p.r));
}

/// Translates p1 so both components stay >= 1 up to xi = 1, and p2 so that its first
/// component equals 1 - eps at xi = 1; then builds the superposition.
inline SuperpositionSpec anchored_superposition(const FrontProfile& p1, const FrontProfile& p2, double psi1,
                                                double psi2, double eps,
                                                double separation_floor = kDefaultSeparationFloor) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw ValidationError("anchored superposition: eps must lie in (0, 1)");
    }
    const auto drop = first_drop_below_one(p1);
    if (!drop) {
        throw ValidationError("anchored superposition: p1 never drops below 1");
    }
    FrontProfile q1 = translate(p1, 1.0 - *drop);
    FrontProfile q2 = anchor_at_level(p2, 0, 1.0 - eps, 1.0);
    return make_superposition(std::move(q1), std::move(q2), psi1, psi2, separation_floor);
}

// ---------------------------------------------------------------------------
// Diagonal bound sweep.

struct TimeSpaceGrid {
    double t0 = 0.0, t1 = 20.0, dt = 0.05;
    double x0 = -60.0, x1 = 320.0, dx = 0.05;

    std::size_t nt() const { return static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9)) + 1; }
    std::size_t nx() const { return static_cast<std::size_t>(std::floor((x1 - x0) / dx + 1e-9)) + 1; }
    double t(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double x(std::size_t j) const { return x0 + dx * static_cast<double>(j); }

    void validate() const {
        if (!(dt > 0.0 && dx > 0.0 && t1 >= t0 && x1 > x0 && t0 >= 0.0)) {
            throw ValidationError("time-space grid needs dt, dx > 0, t1 >= t0 >= 0, x1 > x0");
        }
    }
};

struct DiagBoundReport {
    double eta = 0.0;  // -max over the grid of both diagonal entries
    double t_at = 0.0;
    double x_at = 0.0;
    int entry = 0;  // 0 or 1
    Region region = Region::I1;
    std::array<double, 5> region_max{};  // max diagonal entry per region (-inf if unvisited)
    std::array<std::size_t, 5> region_count{};
};

inline DiagBoundReport diag_bound_check(const SuperpositionSpec& s, const WeightSpec& w, const ModelParams& p,
                                        const TimeSpaceGrid& g) {
    check_consistent(s, w);
    g.validate();
    DiagBoundReport rep;
    rep.region_max.fill(-std::numeric_limits<double>::infinity());
    double worst = -std::numeric_limits<double>::infinity();
    const std::size_t nt = g.nt(), nx = g.nx();
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = g.t(i);
        for (std::size_t j = 0; j < nx; ++j) {
            const double x = g.x(j);
            const Matrix2 a = a0_matrix(t, x, s, w, p);
            const Region reg = classify_region(t, x, w);
            const auto ri = static_cast<std::size_t>(reg) - 1;
            const double m = std::max(a.a11, a.a22);
            rep.region_max[ri] = std::max(rep.region_max[ri], m);
            ++rep.region_count[ri];
            if (m > worst) {
                worst = m;
                rep.t_at = t;
                rep.x_at = x;
                rep.entry = a.a11 >= a.a22 ? 0 : 1;
                rep.region = reg;
            }
        }
    }
    rep.eta = -worst;
    return rep;
}

/// Largest alpha (alpha1 = alpha2 = alpha) in [lo, hi] for which `eta_of(alpha)` stays
/// positive, by bisection. `lo` must be good; returns hi if hi is good.
inline double alpha_threshold(const std::function<double(double)>& eta_of, double lo, double hi,
                              double resolution = 1e-3) {
    if (!(lo < hi) || !(resolution > 0.0)) {
        throw ValidationError("alpha bisection needs lo < hi and a positive resolution");
    }
    if (!(eta_of(lo) > 0.0)) {
        throw ValidationError("alpha bisection: lower end does not retain eta > 0");
    }
    if (eta_of(hi) > 0.0) {
        return hi;
    }
    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        (eta_of(mid) > 0.0 ? lo : hi) = mid;
    }
    return lo;
}

// ---------------------------------------------------------------------------
// Single-front weight: 0 / -(kappa/4)(xi+1)^2 / -kappa xi for xi = x - c t.

inline PhiJet scalar_phi(double t, double x, double c, double kappa) {
    const double xi = x - c * t;
    PhiJet j;
    if (xi <= -1.0) {
        j.region = Region::I1;
    } else if (xi < 1.0) {
        const double y = xi + 1.0;
        j.value = -0.25 * kappa * y * y;
        j.x = -0.5 * kappa * y;
        j.xx = -0.5 * kappa;
        j.t = 0.5 * kappa * c * y;
        j.region = Region::I2;
    } else {
        j.value = -kappa * xi;
        j.x = -kappa;
        j.t = kappa * c;
        j.region = Region::I3;
    }
    return j;
}

/// r(1 - 2p) - phi_t + d phi_x^2 for the scalar front p(x - c t).
inline double scalar_a0(double t, double x, double c, double kappa, const FrontProfile& profile, double d,
                        double r) {
    const PhiJet f = scalar_phi(t, x, c, kappa);
    const double pv = profile.at(x - c * t).u1;
    return r * (1.0 - 2.0 * pv) - f.t + d * f.x * f.x;
}

// ---------------------------------------------------------------------------
// Heatmaps: rows are time levels (top row t = t0), columns are x.

struct Heatmaps {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> phi;
    std::vector<double> a11;
    std::vector<double> a22;
};

inline Heatmaps weight_heatmaps(const SuperpositionSpec& s, const WeightSpec& w, const ModelParams& p,
                                const TimeSpaceGrid& g) {
    g.validate();
    Heatmaps h;
    h.height = g.nt();
    h.width = g.nx();
    const std::size_t n = h.width * h.height;
    h.phi.resize(n);
    h.a11.resize(n);
    h.a22.resize(n);
    for (std::size_t i = 0; i < h.height; ++i) {
        for (std::size_t j = 0; j < h.width; ++j) {
            const std::size_t k = i * h.width + j;
            const Matrix2 a = a0_matrix(g.t(i), g.x(j), s, w, p);
            h.phi[k] = phi(g.t(i), g.x(j), w).value;
            h.a11[k] = a.a11;
            h.a22[k] = a.a22;
        }
    }
    return h;
}

inline void write_heatmap_csv(std::ostream& os, const Heatmaps& h, const TimeSpaceGrid& g) {
    CsvWriter wr(os, {"t", "x", "phi", "a0_11", "a0_22"});
    for (std::size_t i = 0; i < h.height; ++i) {
        for (std::size_t j = 0; j < h.width; ++j) {
            const std::size_t k = i * h.width + j;
            wr.cell(g.t(i)).cell(g.x(j)).cell(h.phi[k]).cell(h.a11[k]).cell(h.a22[k]).end_row();
        }
    }
}

}  // namespace terrace
