#pragma once

#include "terrace/banded.hpp"
#include "terrace/cutoff.hpp"
#include "terrace/io.hpp"
#include "terrace/model.hpp"
#include "terrace/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace terrace {

/// Truncated domain [-L, L] sampled with N uniform points.
struct ProfileDomain {
    double half_width = 100.0;
    std::size_t points = 4000;

    double step() const { return 2.0 * half_width / static_cast<double>(points - 1); }

    void validate() const {
        if (!(half_width > 0.0) || points < 5) {
            throw ValidationError("profile domain needs L > 0 and N >= 5");
        }
    }
};

/// A sampled traveling-wave profile p(xi), u(t, x) = p(x - c t).
///
/// The grid is uniform with spacing h starting at xi0. Translations move xi0 and never
/// resample, so the discrete profile equation keeps holding exactly after a shift.
struct FrontProfile {
    double speed = 0.0;
    double half_width = 0.0;
    double xi0 = 0.0;
    double h = 0.0;
    std::vector<StatePoint> values;
    std::vector<StatePoint> d1;  // central-difference first derivative at the nodes
    std::vector<StatePoint> d2;  // central-difference second derivative at the nodes
    StatePoint left_state;
    StatePoint right_state;
    double tail_rate = std::numeric_limits<double>::quiet_NaN();

    std::size_t size() const { return values.size(); }
    double xi(std::size_t i) const { return xi0 + h * static_cast<double>(i); }
    double xi_max() const { return xi(values.size() - 1); }

    /// Linear interpolation inside the grid, constant endpoint extension outside.
    StatePoint at(double x) const { return interpolate(values, x, true); }
    /// Derivatives vanish outside the grid (constant extension).
    StatePoint derivative_at(double x) const { return interpolate(d1, x, false); }
    StatePoint second_derivative_at(double x) const { return interpolate(d2, x, false); }

    void refresh_derivatives() {
        const std::size_t n = values.size();
        d1.assign(n, StatePoint{});
        d2.assign(n, StatePoint{});
        if (n < 3) {
            return;
        }
        const double inv2h = 1.0 / (2.0 * h);
        const double invh2 = 1.0 / (h * h);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            d1[i] = (values[i + 1] - values[i - 1]) * inv2h;
            d2[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) * invh2;
        }
        if (n >= 4) {
            d1[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv2h;
            d1[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv2h;
            d2[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) * invh2;
            d2[n - 1] =
                (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) * invh2;
        }
    }

    /// Profile with constant values, e.g. a degenerate "front" sitting at an equilibrium.
    static FrontProfile constant(const StatePoint& state, double speed, const ProfileDomain& dom) {
        dom.validate();
        FrontProfile f;
        f.speed = speed;
        f.half_width = dom.half_width;
        f.xi0 = -dom.half_width;
        f.h = dom.step();
        f.values.assign(dom.points, state);
        f.left_state = f.right_state = state;
        f.refresh_derivatives();
        return f;
    }

private:
    StatePoint interpolate(const std::vector<StatePoint>& v, double x, bool extend) const {
        const double pos = (x - xi0) / h;
        const double last = static_cast<double>(v.size() - 1);
        if (!(pos > 0.0)) {
            return (extend || pos == 0.0) ? v.front() : StatePoint{};
        }
        if (!(pos < last)) {
            return (extend || pos == last) ? v.back() : StatePoint{};
        }
        const auto k = static_cast<std::size_t>(pos);
        const double s = pos - static_cast<double>(k);
        if (k + 1 >= v.size()) {
            return v.back();
        }
        return (1.0 - s) * v[k] + s * v[k + 1];
    }
};

enum class FrontEnds { e1_e3, e1_e4 };

inline const char* to_string(FrontEnds e) { return e == FrontEnds::e1_e3 ? "e1-e3" : "e1-e4"; }

struct NewtonOptions {
    int max_iterations = 200;
    int max_halvings = 30;
    double tolerance = 1e-10;
};

inline constexpr double kMonotoneTol = 1e-10;

namespace detail {

inline double sup_norm(const std::vector<StatePoint>& v) {
    double m = 0.0;
    for (const auto& p : v) {
        m = std::max(m, max_abs(p));
    }
    return m;
}

/// Least-squares decay rate of |p - right_state| on the far-right tail, excluding the
/// last 10% of the grid where the Dirichlet truncation acts.
inline double measure_tail_rate(const FrontProfile& f) {
    const std::size_t n = f.size();
    const std::size_t stop = static_cast<std::size_t>(0.9 * static_cast<double>(n - 1));
    for (auto [lo, hi] : {std::pair{1e-9, 1e-4}, std::pair{1e-12, 1e-2}}) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t cnt = 0;
        for (std::size_t i = n / 2; i <= stop; ++i) {
            const double dev = max_abs(f.values[i] - f.right_state);
            if (dev >= lo && dev <= hi) {
                const double x = f.xi(i);
                const double y = std::log(dev);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++cnt;
            }
        }
        if (cnt >= 5) {
            const double c = static_cast<double>(cnt);
            const double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
            return -slope;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Slow root of a k^2 - c k + b = 0, or c/(2a) when the roots are complex.
inline double slow_root(double a, double c, double b) {
    const double disc = c * c - 4.0 * a * b;
    if (disc < 0.0) {
        return c / (2.0 * a);
    }
    return (c - std::sqrt(disc)) / (2.0 * a);
}

inline void check_monotone(const FrontProfile& f, int components) {
    for (int comp = 0; comp < components; ++comp) {
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            const double rise = f.values[i + 1][comp] - f.values[i][comp];
            if (rise > kMonotoneTol) {
                std::ostringstream os;
                os << "front profile component " << comp + 1 << " not monotone at xi=" << f.xi(i)
                   << " (increase " << rise << ")";
                throw NumericalError(os.str());
            }
        }
    }
}

}  // namespace detail

/// Discrete residual D p'' + c p' + g(p) at the interior nodes, using the same second-order
/// central differences as the profile solver. Endpoint rows hold the Dirichlet defect.
inline std::vector<StatePoint> profile_residual(const FrontProfile& f, const ModelParams& p) {
    const std::size_t n = f.size();
    std::vector<StatePoint> res(n);
    const double invh2 = 1.0 / (f.h * f.h);
    const double inv2h = 1.0 / (2.0 * f.h);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const StatePoint lap = (f.values[i + 1] - 2.0 * f.values[i] + f.values[i - 1]) * invh2;
        const StatePoint grad = (f.values[i + 1] - f.values[i - 1]) * inv2h;
        res[i] = StatePoint{p.d * lap.u1, lap.u2} + f.speed * grad + reaction(f.values[i], p);
    }
    res[0] = f.values[0] - f.left_state;
    res[n - 1] = f.values[n - 1] - f.right_state;
    return res;
}

/// Scalar KPP residual d q'' + c q' + r q (1 - q) with the same stencil.
inline std::vector<double> kpp_residual(const FrontProfile& f, double d, double r) {
    const std::size_t n = f.size();
    std::vector<double> res(n, 0.0);
    const double invh2 = 1.0 / (f.h * f.h);
    const double inv2h = 1.0 / (2.0 * f.h);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double q = f.values[i].u1;
        res[i] = d * (f.values[i + 1].u1 - 2.0 * q + f.values[i - 1].u1) * invh2 +
                 f.speed * (f.values[i + 1].u1 - f.values[i - 1].u1) * inv2h + r * q * (1.0 - q);
    }
    res[0] = f.values[0].u1 - f.left_state.u1;
    res[n - 1] = f.values[n - 1].u1 - f.right_state.u1;
    return res;
}

/// Residual evaluated with fourth-order central differences. It measures the truncation
/// error of the second-order solve and therefore scales like h^2 under refinement.
inline std::vector<StatePoint> profile_truncation_residual(const FrontProfile& f, const ModelParams& p) {
    const std::size_t n = f.size();
    std::vector<StatePoint> res(n);
    const double h = f.h;
    const auto& v = f.values;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const StatePoint lap =
            (-1.0 * v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - 1.0 * v[i - 2]) *
            (1.0 / (12.0 * h * h));
        const StatePoint grad = (-1.0 * v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) * (1.0 / (12.0 * h));
        res[i] = StatePoint{p.d * lap.u1, lap.u2} + f.speed * grad + reaction(v[i], p);
    }
    return res;
}

/// Sup-norm over nodes whose index lies outside the boundary layers (fraction of N per side).
template <class T>
double interior_sup(const std::vector<T>& r, double layer_fraction = 0.1) {
    const std::size_t n = r.size();
    const auto skip = static_cast<std::size_t>(std::ceil(layer_fraction * static_cast<double>(n)));
    double m = 0.0;
    for (std::size_t i = std::max<std::size_t>(skip, 2); i + std::max<std::size_t>(skip, 2) < n; ++i) {
        if constexpr (std::is_same_v<T, StatePoint>) {
            m = std::max(m, max_abs(r[i]));
        } else {
            m = std::max(m, std::abs(r[i]));
        }
    }
    return m;
}

inline double kpp_minimal_speed(double d, double r) { return 2.0 * std::sqrt(d * r); }

inline constexpr double kEndpointTol = 1e-8;

namespace detail {

/// Discrete travelling-wave problem diag(dif) u'' + c u' + g(u) = 0 on the uniform grid
/// -L + i h, i = 0..n-1, with m <= 2 components stored node-interleaved.
///
/// All components are pinned to `left` at i = 0. At i = n-1 the components listed in
/// `pinned` are pinned to `right`; the single free component's row is replaced by the phase
/// condition u_0(0) = phase_value (linear interpolation), which removes the translation
/// degeneracy. The phase row is moved next to its columns so the system stays banded.
struct WaveProblem {
    int m = 1;
    std::array<double, 2> dif{1.0, 1.0};
    double c = 0.0;
    StatePoint left;
    StatePoint right;
    int free_comp = 0;
    double phase_value = 0.5;
    std::function<StatePoint(const StatePoint&)> g;
    std::function<Matrix2(const StatePoint&)> dg;
};

inline std::vector<StatePoint> solve_wave(const WaveProblem& w, std::vector<StatePoint> u, const ProfileDomain& dom,
                                          const NewtonOptions& opt, const std::string& who) {
    const std::size_t n = dom.points;
    const std::size_t m = static_cast<std::size_t>(w.m);
    const double h = dom.step();
    const double invh2 = 1.0 / (h * h);
    const double inv2h = 1.0 / (2.0 * h);
    const double pos = dom.half_width / h;
    std::size_t k0 = std::min(static_cast<std::size_t>(pos), n - 2);
    const double s = pos - static_cast<double>(k0);
    const double w0 = 1.0 - s, w1 = s;

    const std::size_t removed = m * (n - 1) + static_cast<std::size_t>(w.free_comp);
    const std::size_t phase_slot = m * k0;
    auto slot = [&](std::size_t row) {
        if (row < phase_slot || row > removed) {
            return row;
        }
        return row + 1;
    };

    // residual rows in natural order; the removed row holds the phase defect
    auto residual = [&](const std::vector<StatePoint>& v, std::vector<double>& out) {
        for (std::size_t k = 0; k < m; ++k) {
            out[k] = v[0][int(k)] - w.left[int(k)];
            out[m * (n - 1) + k] = v[n - 1][int(k)] - w.right[int(k)];
        }
        out[removed] = w0 * v[k0].u1 + w1 * v[k0 + 1].u1 - w.phase_value;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const StatePoint gi = w.g(v[i]);
            for (std::size_t k = 0; k < m; ++k) {
                const int kk = int(k);
                out[m * i + k] = w.dif[k] * (v[i + 1][kk] - 2.0 * v[i][kk] + v[i - 1][kk]) * invh2 +
                                 w.c * (v[i + 1][kk] - v[i - 1][kk]) * inv2h + gi[kk];
            }
        }
        double l2 = 0.0, sup = 0.0;
        for (double x : out) {
            l2 += x * x;
            sup = std::max(sup, std::abs(x));
        }
        return std::pair{std::sqrt(l2), sup};
    };

    std::vector<double> res(m * n), step(m * n), trial_res(m * n);
    std::vector<StatePoint> trial(n);
    auto [norm, sup] = residual(u, res);
    int iter = 0;
    for (; iter < opt.max_iterations && !(sup < opt.tolerance); ++iter) {
        BandedSystem jac(m * n);
        for (std::size_t k = 0; k < m; ++k) {
            jac.add(slot(k), k, 1.0);
            const std::size_t r = m * (n - 1) + k;
            if (r != removed) {
                jac.add(slot(r), r, 1.0);
            }
        }
        jac.add(phase_slot, m * k0, w0);
        jac.add(phase_slot, m * (k0 + 1), w1);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const Matrix2 a = w.dg(u[i]);
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t r = slot(m * i + k);
                jac.add(r, m * (i - 1) + k, w.dif[k] * invh2 - w.c * inv2h);
                jac.add(r, m * (i + 1) + k, w.dif[k] * invh2 + w.c * inv2h);
                jac.add(r, m * i + k, -2.0 * w.dif[k] * invh2);
                for (std::size_t j = 0; j < m; ++j) {
                    const double v = k == 0 ? (j == 0 ? a.a11 : a.a12) : (j == 0 ? a.a21 : a.a22);
                    jac.add(r, m * i + j, v);
                }
            }
        }
        std::fill(step.begin(), step.end(), 0.0);
        for (std::size_t r = 0; r < m * n; ++r) {
            step[r == removed ? phase_slot : slot(r)] = -res[r];
        }
        jac.solve(step);
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k <= opt.max_halvings; ++k, lambda *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    trial[i][int(j)] = u[i][int(j)] + lambda * step[m * i + j];
                }
            }
            const auto [tn, ts] = residual(trial, trial_res);
            if (tn < norm) {
                u.swap(trial);
                res.swap(trial_res);
                norm = tn;
                sup = ts;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }
    if (!(sup < opt.tolerance)) {
        std::ostringstream os;
        os << who << ": Newton did not converge after " << iter << " iterations (last residual " << sup << ")";
        throw NumericalError(os.str());
    }
    return u;
}

inline void check_endpoints(const FrontProfile& f, const char* who) {
    const double left_dev = max_abs(f.values.front() - f.left_state);
    const double right_dev = max_abs(f.values.back() - f.right_state);
    if (!(left_dev <= kEndpointTol && right_dev <= kEndpointTol)) {
        std::ostringstream os;
        os << who << ": endpoint values deviate from the end states by " << std::max(left_dev, right_dev)
           << " (> " << kEndpointTol << "); enlarge the domain half-width L";
        throw NumericalError(os.str());
    }
}

inline FrontProfile wrap_profile(std::vector<StatePoint> u, double c, const ProfileDomain& dom,
                                 const StatePoint& left, const StatePoint& right) {
    FrontProfile f;
    f.speed = c;
    f.half_width = dom.half_width;
    f.xi0 = -dom.half_width;
    f.h = dom.step();
    f.values = std::move(u);
    f.left_state = left;
    f.right_state = right;
    f.refresh_derivatives();
    return f;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(std::clamp(z, -700.0, 700.0))); }

}  // namespace detail

/// Scalar KPP front d q'' + c q' + r q(1-q) = 0 connecting 1 to 0, by damped Newton.
/// q(-L) = 1, q(0) = 1/2; the right end value is free (0 is a stable node of the profile
/// ODE). The profile carries q in the first component and zero in the second.
inline FrontProfile kpp_profile(double c, double d, double r, const ProfileDomain& dom,
                                const NewtonOptions& opt = {}) {
    dom.validate();
    if (!(d > 0.0 && r > 0.0)) {
        throw ValidationError("kpp_profile: d and r must be positive");
    }
    const double cmin = kpp_minimal_speed(d, r);
    if (!(c >= cmin * (1.0 - 1e-14))) {
        std::ostringstream os;
        os << "kpp_profile: speed " << c << " is below the minimal KPP speed 2*sqrt(d*r) = " << cmin;
        throw ValidationError(os.str());
    }
    const double kappa = detail::slow_root(d, c, r);
    std::vector<StatePoint> u(dom.points);
    for (std::size_t i = 0; i < dom.points; ++i) {
        u[i] = {detail::logistic(kappa * (-dom.half_width + dom.step() * static_cast<double>(i))), 0.0};
    }
    detail::WaveProblem w;
    w.m = 1;
    w.dif = {d, 1.0};
    w.c = c;
    w.left = {1.0, 0.0};
    w.right = {0.0, 0.0};
    w.free_comp = 0;
    w.phase_value = 0.5;
    w.g = [r](const StatePoint& v) { return StatePoint{r * v.u1 * (1.0 - v.u1), 0.0}; };
    w.dg = [r](const StatePoint& v) { return Matrix2{r * (1.0 - 2.0 * v.u1), 0.0, 0.0, 0.0}; };
    u = detail::solve_wave(w, std::move(u), dom, opt, "kpp_profile");
    FrontProfile f = detail::wrap_profile(std::move(u), c, dom, w.left, w.right);
    detail::check_endpoints(f, "kpp_profile");
    detail::check_monotone(f, 1);
    f.tail_rate = detail::measure_tail_rate(f);
    return f;
}

/// Default lower speed bound for system fronts: the linear spreading speed of the invading
/// component into the right state.
inline double system_front_linear_speed(const ModelParams& p, FrontEnds ends) {
    if (ends == FrontEnds::e1_e3) {
        return 2.0 * std::sqrt(1.0 + p.alpha2);
    }
    return std::max(2.0 * std::sqrt(p.d * p.r), 2.0);
}

/// Profile of D p'' + c p' + g(p) = 0 connecting e1 to e3 or e4, by damped Newton from a
/// logistic initial guess.
///
/// Both components are pinned at the left end. On the right, u1 is pinned for e3 (a saddle
/// direction there) and u2 is free; for e4 u2 is pinned and u1 is free. The free row carries
/// the phase condition u1(0) = midpoint of the end values.
inline FrontProfile system_front(double c, const ModelParams& p, FrontEnds ends, const ProfileDomain& dom,
                                 std::optional<double> c_lower = std::nullopt, const NewtonOptions& opt = {}) {
    dom.validate();
    if (!p.assumption_ok()) {
        throw ValidationError("system_front: parameters violate d > 1, r > 1, r - alpha1*alpha2 > 0");
    }
    const double cmin = c_lower.value_or(system_front_linear_speed(p, ends));
    if (!(c >= cmin)) {
        std::ostringstream os;
        os << "system_front: speed " << c << " below the lower bound " << cmin;
        throw ValidationError(os.str());
    }
    const EquilibriumSet eq = equilibria(p);
    detail::WaveProblem w;
    w.m = 2;
    w.dif = {p.d, 1.0};
    w.c = c;
    w.left = eq.e1;
    w.right = ends == FrontEnds::e1_e3 ? eq.e3 : eq.e4;
    w.free_comp = ends == FrontEnds::e1_e3 ? 1 : 0;
    w.phase_value = 0.5 * (w.left.u1 + w.right.u1);
    w.g = [p](const StatePoint& v) { return reaction(v, p); };
    w.dg = [p](const StatePoint& v) { return jacobian(v, p); };

    double k1 = 0.0, k2 = 0.0;
    if (ends == FrontEnds::e1_e3) {
        k1 = k2 = detail::slow_root(1.0, c, 1.0 + p.alpha2);
    } else {
        k1 = detail::slow_root(p.d, c, p.r);
        k2 = detail::slow_root(1.0, c, 1.0);
    }
    std::vector<StatePoint> u(dom.points);
    for (std::size_t i = 0; i < dom.points; ++i) {
        const double x = -dom.half_width + dom.step() * static_cast<double>(i);
        u[i] = {w.right.u1 + (w.left.u1 - w.right.u1) * detail::logistic(k1 * x),
                w.right.u2 + (w.left.u2 - w.right.u2) * detail::logistic(k2 * x)};
    }
    std::ostringstream who;
    who << "system_front(" << to_string(ends) << ", c=" << c << ")";
    u = detail::solve_wave(w, std::move(u), dom, opt, who.str());
    FrontProfile f = detail::wrap_profile(std::move(u), c, dom, w.left, w.right);
    detail::check_endpoints(f, "system_front");
    detail::check_monotone(f, 2);
    f.tail_rate = detail::measure_tail_rate(f);
    return f;
}

/// Largest xi such that both components are >= 1 on the grid up to it (left side of a
/// decreasing e1 -> e3 profile), or nullopt when the leftmost sample already fails.
inline std::optional<double> above_one_until(const FrontProfile& f) {
    std::optional<double> last;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.values[i].u1 >= 1.0 && f.values[i].u2 >= 1.0) {
            last = f.xi(i);
        } else {
            break;
        }
    }
    return last;
}

/// First position (scanning from the left) where the given component crosses level,
/// linearly interpolated between samples.
inline std::optional<double> level_crossing(const FrontProfile& f, int component, double level) {
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const double a = f.values[i][component] - level;
        const double b = f.values[i + 1][component] - level;
        if (a == 0.0) {
            return f.xi(i);
        }
        if ((a > 0.0) != (b > 0.0)) {
            return f.xi(i) + f.h * a / (a - b);
        }
    }
    return std::nullopt;
}

/// Translate so that p_new(xi) = p(xi - shift).
inline FrontProfile translate(FrontProfile f, double shift) {
    f.xi0 += shift;
    return f;
}

/// Translate so that the first component equals the midpoint of its endpoint values at xi = 0.
inline FrontProfile normalize_translation(const FrontProfile& f) {
    const double mid = 0.5 * (f.left_state.u1 + f.right_state.u1);
    const auto x = level_crossing(f, 0, mid);
    if (!x) {
        throw ValidationError("normalize_translation: first component never crosses its endpoint midpoint");
    }
    return translate(f, -*x);
}

/// Translate so that `component` crosses `level` exactly at xi = position.
inline FrontProfile anchor_at_level(const FrontProfile& f, int component, double level, double position) {
    const auto x = level_crossing(f, component, level);
    if (!x) {
        std::ostringstream os;
        os << "anchor_at_level: component " << component + 1 << " never crosses " << level;
        throw ValidationError(os.str());
    }
    return translate(f, position - *x);
}

// ---------------------------------------------------------------------------
// Profile CSV: '#'-prefixed metadata line, then columns xi,u1,u2.

inline void write_profile_csv(std::ostream& os, const FrontProfile& f) {
    os << "# speed=" << format_double(f.speed) << ";left=" << format_double(f.left_state.u1) << ' '
       << format_double(f.left_state.u2) << ";right=" << format_double(f.right_state.u1) << ' '
       << format_double(f.right_state.u2) << ";L=" << format_double(f.half_width) << ";N=" << f.size()
       << ";tail_rate=" << format_double(f.tail_rate) << '\n';
    CsvWriter w(os, {"xi", "u1", "u2"});
    for (std::size_t i = 0; i < f.size(); ++i) {
        w.cell(f.xi(i)).cell(f.values[i].u1).cell(f.values[i].u2).end_row();
    }
}

inline FrontProfile read_profile_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
        throw ValidationError("profile CSV: missing '# ' metadata line");
    }
    std::map<std::string, std::string> meta;
    std::stringstream ms(line.substr(2));
    std::string item;
    while (std::getline(ms, item, ';')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("profile CSV: malformed metadata entry '" + item + "'");
        }
        meta[item.substr(0, eq)] = item.substr(eq + 1);
    }
    for (const char* key : {"speed", "left", "right", "L", "N"}) {
        if (!meta.count(key)) {
            throw ValidationError(std::string("profile CSV: metadata key missing: ") + key);
        }
    }
    auto pair_of = [](const std::string& s) {
        std::istringstream ps(s);
        StatePoint p;
        if (!(ps >> p.u1 >> p.u2)) {
            throw ValidationError("profile CSV: bad state '" + s + "'");
        }
        return p;
    };
    FrontProfile f;
    f.speed = std::stod(meta["speed"]);
    f.left_state = pair_of(meta["left"]);
    f.right_state = pair_of(meta["right"]);
    f.half_width = std::stod(meta["L"]);
    const auto n = static_cast<std::size_t>(std::stoull(meta["N"]));
    if (meta.count("tail_rate")) {
        f.tail_rate = std::stod(meta["tail_rate"]);
    }
    if (!std::getline(is, line) || line != "xi,u1,u2") {
        throw ValidationError("profile CSV: expected header 'xi,u1,u2'");
    }
    std::vector<double> xs;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        double x, a, b;
        char c1, c2;
        if (!(ls >> x >> c1 >> a >> c2 >> b) || c1 != ',' || c2 != ',') {
            throw ValidationError("profile CSV: malformed row '" + line + "'");
        }
        xs.push_back(x);
        f.values.push_back({a, b});
    }
    if (f.values.size() != n || n < 5) {
        throw ValidationError("profile CSV: row count does not match N");
    }
    f.xi0 = xs.front();
    f.h = (xs.back() - xs.front()) / static_cast<double>(n - 1);
    f.refresh_derivatives();
    return f;
}

// ---------------------------------------------------------------------------
// Two-front superposition.

struct SuperpositionSpec {
    FrontProfile p1;  // e1 -> e3, speed c1
    FrontProfile p2;  // e3 -> e4, speed c2
    double c1 = 0.0;
    double c2 = 0.0;
    double c0 = 0.0;
    double psi1 = 0.0;
    double psi2 = 0.0;
};

inline constexpr double kDefaultSeparationFloor = 20.0;

inline SuperpositionSpec make_superposition(FrontProfile p1, FrontProfile p2, double psi1, double psi2,
                                            double separation_floor = kDefaultSeparationFloor) {
    std::vector<std::string> problems;
    if (!(p1.speed < p2.speed)) {
        problems.push_back("fronts must be ordered with c1 < c2 (got c1=" + format_double(p1.speed) +
                           ", c2=" + format_double(p2.speed) + ")");
    }
    if (!(psi1 < 0.0 && 0.0 < psi2)) {
        problems.push_back("positions must satisfy psi1 < 0 < psi2");
    }
    if (!(psi2 - psi1 >= separation_floor)) {
        problems.push_back("separation psi2 - psi1 = " + format_double(psi2 - psi1) + " is below the floor " +
                           format_double(separation_floor));
    }
    if (!problems.empty()) {
        std::string msg = "superposition: ";
        for (std::size_t i = 0; i < problems.size(); ++i) {
            msg += (i ? "; " : "") + problems[i];
        }
        throw ValidationError(msg);
    }
    SuperpositionSpec s;
    s.c1 = p1.speed;
    s.c2 = p2.speed;
    s.c0 = 0.5 * (s.c1 + s.c2);
    s.psi1 = psi1;
    s.psi2 = psi2;
    s.p1 = std::move(p1);
    s.p2 = std::move(p2);
    return s;
}

/// (1 - chi(x - c0 t)) p1(x - c1 t - psi1) + chi(x - c0 t) p2(x - c2 t - psi2)
inline StatePoint superpose(const SuperpositionSpec& s, double t, double x) {
    const double zeta = x - s.c0 * t;
    if (zeta <= -1.0) {
        return s.p1.at(x - s.c1 * t - s.psi1);
    }
    if (zeta >= 1.0) {
        return s.p2.at(x - s.c2 * t - s.psi2);
    }
    const double chi = cutoff_chi(zeta);
    return (1.0 - chi) * s.p1.at(x - s.c1 * t - s.psi1) + chi * s.p2.at(x - s.c2 * t - s.psi2);
}

struct AnsatzJet {
    StatePoint u;
    StatePoint u_t;
    StatePoint u_x;
    StatePoint u_xx;
};

/// Superposition together with its time and space derivatives (chain rule through the
/// cutoff and the interpolated profile derivatives).
inline AnsatzJet superpose_jet(const SuperpositionSpec& s, double t, double x) {
    const double zeta = x - s.c0 * t;
    const double xi1 = x - s.c1 * t - s.psi1;
    const double xi2 = x - s.c2 * t - s.psi2;
    const double chi = cutoff_chi(zeta);
    const double dchi = cutoff_chi_prime(zeta);
    const double ddchi = cutoff_chi_second(zeta);
    const StatePoint a = s.p1.at(xi1), a1 = s.p1.derivative_at(xi1), a2 = s.p1.second_derivative_at(xi1);
    const StatePoint b = s.p2.at(xi2), b1 = s.p2.derivative_at(xi2), b2 = s.p2.second_derivative_at(xi2);
    const StatePoint diff = b - a;
    AnsatzJet j;
    j.u = (1.0 - chi) * a + chi * b;
    j.u_t = (-s.c0 * dchi) * diff + (-(1.0 - chi) * s.c1) * a1 + (-chi * s.c2) * b1;
    j.u_x = dchi * diff + (1.0 - chi) * a1 + chi * b1;
    j.u_xx = ddchi * diff + (2.0 * dchi) * (b1 - a1) + (1.0 - chi) * a2 + chi * b2;
    return j;
}

}  // namespace terrace
