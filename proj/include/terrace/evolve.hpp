#pragma once

#include "terrace/banded.hpp"
#include "terrace/fronts.hpp"
#include "terrace/io.hpp"
#include "terrace/model.hpp"
#include "terrace/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace terrace {

enum class Mode { nonlinear, linear_at_ansatz, weighted_linear };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::nonlinear: return "nonlinear";
        case Mode::linear_at_ansatz: return "linear_at_ansatz";
        default: return "weighted_linear";
    }
}

enum class DiffusionScheme { implicit, explicit_euler };

/// Uniform grid with `points` nodes including both Dirichlet ends.
struct SpaceGrid {
    double x_lo = -250.0;
    double x_hi = 250.0;
    std::size_t points = 5001;

    double step() const { return (x_hi - x_lo) / static_cast<double>(points - 1); }
    double x(std::size_t i) const { return x_lo + step() * static_cast<double>(i); }
    void validate() const {
        if (!(x_hi > x_lo) || points < 5) {
            throw ValidationError("space grid needs x_hi > x_lo and at least 5 points");
        }
    }
};

struct StepPiece {
    double a = 0.0;
    double b = 0.0;
    StatePoint state;
};

struct GaussianBump {
    double center = 0.0;
    double width = 2.0;  // standard deviation
    double amplitude = 1.0;
    bool on_u1 = true;
    bool on_u2 = true;
};

/// Background state, painted open intervals (later pieces win), then additive bumps.
struct InitialCondition {
    StatePoint background;
    std::vector<StepPiece> steps;
    std::vector<GaussianBump> bumps;
    bool normalize_l2 = false;

    std::vector<StatePoint> sample(const SpaceGrid& g) const;
};

inline double l2_norm(const std::vector<StatePoint>& u, double h) {
    // trapezoid rule on |u|^2
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = (i == 0 || i + 1 == u.size()) ? 0.5 : 1.0;
        s += w * (u[i].u1 * u[i].u1 + u[i].u2 * u[i].u2);
    }
    return std::sqrt(s * h);
}

inline std::vector<StatePoint> InitialCondition::sample(const SpaceGrid& g) const {
    g.validate();
    std::vector<StatePoint> u(g.points, background);
    for (std::size_t i = 0; i < g.points; ++i) {
        const double x = g.x(i);
        for (const auto& s : steps) {
            if (s.a < x && x < s.b) {
                u[i] = s.state;
            }
        }
        for (const auto& b : bumps) {
            const double z = (x - b.center) / b.width;
            const double v = b.amplitude * std::exp(-0.5 * z * z);
            u[i] += StatePoint{b.on_u1 ? v : 0.0, b.on_u2 ? v : 0.0};
        }
    }
    if (normalize_l2) {
        const double n = l2_norm(u, g.step());
        if (!(n > 0.0)) {
            throw ValidationError("initial condition: cannot normalize a zero field");
        }
        for (auto& v : u) {
            v *= 1.0 / n;
        }
    }
    return u;
}

struct ScenarioConfig {
    ModelParams params;
    Mode mode = Mode::nonlinear;
    std::shared_ptr<const SuperpositionSpec> spec;  // linear modes
    std::optional<WeightSpec> weight;               // weighted mode
    InitialCondition initial;
    SpaceGrid grid;
    double t_end = 1.0;
    double dt = 0.01;
    std::size_t snapshot_stride = 100;
    std::size_t trace_stride = 10;
    DiffusionScheme diffusion = DiffusionScheme::implicit;
    int startup_steps = 4;  // backward Euler steps before Crank-Nicolson, damps step data
    double interface_level = 0.5;

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

    void validate() const {
        std::vector<std::string> problems;
        try {
            params.validate();
        } catch (const ValidationError& e) {
            problems.emplace_back(e.what());
        }
        try {
            grid.validate();
        } catch (const ValidationError& e) {
            problems.emplace_back(e.what());
        }
        if (!(dt > 0.0 && t_end >= 0.0)) {
            problems.emplace_back("dt must be positive and t_end non-negative");
        }
        if (snapshot_stride == 0 || trace_stride == 0) {
            problems.emplace_back("strides must be positive");
        }
        if (mode != Mode::nonlinear && !spec) {
            problems.emplace_back(std::string("mode ") + to_string(mode) + " needs a superposition");
        }
        if (mode == Mode::weighted_linear && !weight) {
            problems.emplace_back("weighted mode needs a weight");
        }
        if (spec && weight) {
            try {
                check_consistent(*spec, *weight);
            } catch (const ValidationError& e) {
                problems.emplace_back(e.what());
            }
        }
        if (diffusion == DiffusionScheme::explicit_euler && points_ok() &&
            !(dt <= 0.25 * grid.step() * grid.step() / std::max(params.d, 1.0))) {
            problems.emplace_back("explicit diffusion needs dt <= 0.25 dx^2 / max(d, 1)");
        }
        if (!problems.empty()) {
            std::string msg = "scenario: ";
            for (std::size_t i = 0; i < problems.size(); ++i) {
                msg += (i ? "; " : "") + problems[i];
            }
            throw ValidationError(msg);
        }
    }

private:
    bool points_ok() const { return grid.points >= 5 && grid.x_hi > grid.x_lo; }
};

struct SpaceTimeField {
    std::vector<double> x_grid;
    std::vector<double> t_grid;                     // snapshot times
    std::vector<std::vector<StatePoint>> values;    // one row per snapshot
    std::vector<double> trace_t;                    // trace times
    std::vector<double> norms;                      // L2 norm at trace times
    std::vector<std::array<double, 2>> interfaces;  // per trace time, NaN when absent
};

/// Rightmost crossing of `level` by component k, linearly interpolated; NaN if none.
inline double rightmost_crossing(const std::vector<StatePoint>& u, const SpaceGrid& g, int k, double level) {
    for (std::size_t i = u.size() - 1; i > 0; --i) {
        const double a = u[i - 1][k] - level;
        const double b = u[i][k] - level;
        if (b == 0.0) {
            return g.x(i);
        }
        if ((a > 0.0) != (b > 0.0)) {
            return g.x(i - 1) + g.step() * a / (a - b);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// g(ubar + v) - g(ubar) - J_g(ubar) v; exact quadratic form for this reaction.
inline StatePoint quadratic_remainder(const StatePoint& ubar, const StatePoint& v, const ModelParams& p) {
    (void)ubar;
    return {-p.r * v.u1 * v.u1 + p.alpha1 * v.u1 * v.u2, -v.u2 * v.u2 + p.alpha2 * v.u1 * v.u2};
}

/// Strang splitting: half reaction (RK4), full diffusion (theta scheme), half reaction.
class Stepper {
public:
    explicit Stepper(const ScenarioConfig& cfg) : cfg_(cfg), n_(cfg.grid.points), h_(cfg.grid.step()) {
        cfg_.validate();
        scratch_.resize(n_);
        rhs_.resize(n_);
        sys_ = Tridiagonal(n_);
    }

    /// Advances u from step index n (time n dt) by one step.
    void step(std::vector<StatePoint>& u, std::size_t n, bool startup) {
        const long long q = 4 * static_cast<long long>(n);
        reaction(u, q, q + 1, q + 2);
        diffusion(u, q, q + 4, startup ? 1.0 : 0.5);
        reaction(u, q + 2, q + 3, q + 4);
    }

private:
    // Coefficients on the grid at time (quarter step index) key * dt / 4.
    struct Level {
        long long key = -1;
        std::size_t used = 0;
        std::vector<Matrix2> pot;
        std::array<std::vector<double>, 2> adv;
    };

    double time_of(long long key) const { return 0.25 * cfg_.dt * static_cast<double>(key); }

    const Level& level(long long key) {
        ++clock_;
        Level* oldest = &cache_[0];
        for (auto& l : cache_) {
            if (l.key == key) {
                l.used = clock_;
                return l;
            }
            if (l.used < oldest->used) {
                oldest = &l;
            }
        }
        Level& l = *oldest;  // least recently used
        l.key = key;
        l.used = clock_;
        l.pot.resize(n_);
        l.adv[0].assign(n_, 0.0);
        l.adv[1].assign(n_, 0.0);
        const double t = time_of(key);
        const bool weighted = cfg_.mode == Mode::weighted_linear;
        for (std::size_t i = 0; i < n_; ++i) {
            const double x = cfg_.grid.x(i);
            Matrix2 a = jacobian(superpose(*cfg_.spec, t, x), cfg_.params);
            if (weighted) {
                const PhiJet f = phi(t, x, *cfg_.weight);
                a.a11 += -f.t + cfg_.params.d * (f.xx + f.x * f.x);
                a.a22 += -f.t + (f.xx + f.x * f.x);
                l.adv[0][i] = 2.0 * cfg_.params.d * f.x;
                l.adv[1][i] = 2.0 * f.x;
            }
            l.pot[i] = a;
        }
        return l;
    }

    /// RK4 over [k0, k2] with midpoint k1 (quarter-step keys).
    void reaction(std::vector<StatePoint>& u, long long k0, long long k1, long long k2) {
        const double tau = 0.25 * cfg_.dt * static_cast<double>(k2 - k0);
        if (cfg_.mode == Mode::nonlinear) {
            const ModelParams& p = cfg_.params;
            for (std::size_t i = 1; i + 1 < n_; ++i) {
                const StatePoint y = u[i];
                const StatePoint a = terrace::reaction(y, p);
                const StatePoint b = terrace::reaction(y + (0.5 * tau) * a, p);
                const StatePoint c = terrace::reaction(y + (0.5 * tau) * b, p);
                const StatePoint e = terrace::reaction(y + tau * c, p);
                u[i] = y + (tau / 6.0) * (a + 2.0 * b + 2.0 * c + e);
            }
            return;
        }
        const auto& L0 = level(k0).pot;
        const auto& Lh = level(k1).pot;
        const auto& L1 = level(k2).pot;
        for (std::size_t i = 1; i + 1 < n_; ++i) {
            const StatePoint y = u[i];
            const StatePoint a = L0[i] * y;
            const StatePoint b = Lh[i] * (y + (0.5 * tau) * a);
            const StatePoint c = Lh[i] * (y + (0.5 * tau) * b);
            const StatePoint e = L1[i] * (y + tau * c);
            u[i] = y + (tau / 6.0) * (a + 2.0 * b + 2.0 * c + e);
        }
    }

    /// theta scheme for d_k w_xx + a_k(t, x) w_x, a_k = 2 d_k phi_x in weighted mode.
    void diffusion(std::vector<StatePoint>& u, long long k0, long long k1, double theta) {
        const double dt = cfg_.dt;
        const double invh2 = 1.0 / (h_ * h_);
        const double inv2h = 1.0 / (2.0 * h_);
        const bool has_adv = cfg_.mode == Mode::weighted_linear;
        const bool expl = cfg_.diffusion == DiffusionScheme::explicit_euler;
        for (int k = 0; k < 2; ++k) {
            const double dk = k == 0 ? cfg_.params.d : 1.0;
            const std::vector<double>* a0 = has_adv ? &level(k0).adv[static_cast<std::size_t>(k)] : nullptr;
            for (std::size_t i = 1; i + 1 < n_; ++i) {
                const double a = a0 ? (*a0)[i] : 0.0;
                const double lw = dk * (u[i + 1][k] - 2.0 * u[i][k] + u[i - 1][k]) * invh2 +
                                  a * (u[i + 1][k] - u[i - 1][k]) * inv2h;
                rhs_[i] = u[i][k] + (expl ? 1.0 : 1.0 - theta) * dt * lw;
            }
            rhs_[0] = u[0][k];
            rhs_[n_ - 1] = u[n_ - 1][k];
            if (!expl) {
                const std::vector<double>* a1 = has_adv ? &level(k1).adv[static_cast<std::size_t>(k)] : nullptr;
                sys_.diag[0] = sys_.diag[n_ - 1] = 1.0;
                sys_.upper[0] = sys_.lower[n_ - 1] = 0.0;
                for (std::size_t i = 1; i + 1 < n_; ++i) {
                    const double a = a1 ? (*a1)[i] : 0.0;
                    sys_.lower[i] = -theta * dt * (dk * invh2 - a * inv2h);
                    sys_.diag[i] = 1.0 + theta * dt * 2.0 * dk * invh2;
                    sys_.upper[i] = -theta * dt * (dk * invh2 + a * inv2h);
                }
                solve_tridiagonal(sys_, rhs_, scratch_);
            }
            for (std::size_t i = 0; i < n_; ++i) {
                u[i][k] = rhs_[i];
            }
        }
    }

    ScenarioConfig cfg_;
    std::size_t n_;
    double h_;
    Tridiagonal sys_;
    std::vector<double> scratch_;
    std::vector<double> rhs_;
    std::array<Level, 6> cache_;
    std::size_t clock_ = 0;
};

inline void check_finite(const std::vector<StatePoint>& u, double t) {
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!u[i].finite()) {
            std::ostringstream os;
            os << "blow-up: non-finite value at t=" << t << " (node " << i << ")";
            throw NumericalError(os.str());
        }
    }
}

/// Integrates from the initial condition to t_end. Dirichlet ends keep their initial values.
inline SpaceTimeField simulate(const ScenarioConfig& cfg, std::vector<StatePoint> u) {
    cfg.validate();
    if (u.size() != cfg.grid.points) {
        throw ValidationError("simulate: initial data size does not match the grid");
    }
    check_finite(u, 0.0);
    Stepper stepper(cfg);
    SpaceTimeField f;
    f.x_grid.resize(cfg.grid.points);
    for (std::size_t i = 0; i < cfg.grid.points; ++i) {
        f.x_grid[i] = cfg.grid.x(i);
    }
    auto record = [&](std::size_t n, double t) {
        if (n % cfg.trace_stride == 0) {
            f.trace_t.push_back(t);
            f.norms.push_back(l2_norm(u, cfg.grid.step()));
            f.interfaces.push_back({rightmost_crossing(u, cfg.grid, 0, cfg.interface_level),
                                    rightmost_crossing(u, cfg.grid, 1, cfg.interface_level)});
        }
        if (n % cfg.snapshot_stride == 0) {
            f.t_grid.push_back(t);
            f.values.push_back(u);
        }
    };
    const std::size_t steps = cfg.steps();
    record(0, 0.0);
    for (std::size_t n = 0; n < steps; ++n) {
        stepper.step(u, n, static_cast<int>(n) < cfg.startup_steps);
        check_finite(u, cfg.dt * static_cast<double>(n + 1));
        record(n + 1, cfg.dt * static_cast<double>(n + 1));
    }
    return f;
}

inline SpaceTimeField simulate(const ScenarioConfig& cfg) { return simulate(cfg, cfg.initial.sample(cfg.grid)); }

// ---------------------------------------------------------------------------
// Residual of the ansatz.

enum class AnsatzVariant { cutoff, additive };

/// -u_t + D u_xx + g(u) for the superposition (cutoff) or for p1 + p2 - e3 (additive).
inline std::vector<StatePoint> residual_field(const SuperpositionSpec& s, double t, const std::vector<double>& xs,
                                              const ModelParams& p, AnsatzVariant variant) {
    std::vector<StatePoint> out(xs.size());
    const StatePoint e3{1.0, 0.0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        StatePoint u, ut, uxx;
        if (variant == AnsatzVariant::cutoff) {
            const AnsatzJet j = superpose_jet(s, t, x);
            u = j.u;
            ut = j.u_t;
            uxx = j.u_xx;
        } else {
            const double xi1 = x - s.c1 * t - s.psi1;
            const double xi2 = x - s.c2 * t - s.psi2;
            u = s.p1.at(xi1) + s.p2.at(xi2) - e3;
            ut = (-s.c1) * s.p1.derivative_at(xi1) + (-s.c2) * s.p2.derivative_at(xi2);
            uxx = s.p1.second_derivative_at(xi1) + s.p2.second_derivative_at(xi2);
        }
        out[i] = -1.0 * ut + StatePoint{p.d * uxx.u1, uxx.u2} + reaction(u, p);
    }
    return out;
}

/// sup over xs of |R / omega|, computed as |R| exp(-phi) in log space to avoid overflow.
inline double weighted_residual_log_sup(const SuperpositionSpec& s, const WeightSpec& w, double t,
                                        const std::vector<double>& xs, const ModelParams& p) {
    const auto r = residual_field(s, t, xs, p, AnsatzVariant::cutoff);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double m = max_abs(r[i]);
        if (m > 0.0) {
            best = std::max(best, std::log(m) - phi(t, xs[i], w).value);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Rate fitting.

struct DecayFit {
    double eta = 0.0;
    double c = 0.0;           // exp(intercept)
    double c_relative = 0.0;  // c divided by the first trace value
    double r2 = 0.0;
    double t0 = 0.0;  // window actually used
    double t1 = 0.0;
    std::size_t samples = 0;
};

/// Least squares line through (t, log norm) on [t0, t1]; eta = -slope. Samples whose norm
/// has underflowed end the window early.
inline DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& norm, double t0, double t1) {
    if (t.size() != norm.size()) {
        throw ValidationError("decay_fit: time and norm traces differ in length");
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1) {
            continue;
        }
        if (!(norm[i] >= std::numeric_limits<double>::min()) || !std::isfinite(norm[i])) {
            break;
        }
        xs.push_back(t[i]);
        ys.push_back(std::log(norm[i]));
    }
    if (xs.size() < 2) {
        throw NumericalError("decay_fit: fewer than two positive samples in the window");
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw NumericalError("decay_fit: degenerate time window");
    }
    const double slope = sxy / sxx;
    DecayFit f;
    f.eta = -slope;
    f.c = std::exp(my - slope * mx);
    f.c_relative = norm.front() > 0.0 ? f.c / norm.front() : std::numeric_limits<double>::quiet_NaN();
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (my + slope * (xs[i] - mx));
        ss_res += e * e;
    }
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    f.t0 = xs.front();
    f.t1 = xs.back();
    f.samples = xs.size();
    return f;
}

/// Least-squares slope of y(t) over [t0, t1], skipping NaN samples.
inline double fitted_speed(const std::vector<double>& t, const std::vector<double>& y, double t0, double t1) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1 || !std::isfinite(y[i])) {
            continue;
        }
        n += 1;
        sx += t[i];
        sy += y[i];
        sxx += t[i] * t[i];
        sxy += t[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || !(den > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return (n * sxy - sx * sy) / den;
}

inline std::vector<double> interface_series(const SpaceTimeField& f, int k) {
    std::vector<double> y(f.interfaces.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = f.interfaces[i][static_cast<std::size_t>(k)];
    }
    return y;
}

/// Interface pair read off a trace: u1 crossing, u2 crossing, their signed separation.
struct InterfaceSummary {
    double speed_u1 = 0.0;
    double speed_u2 = 0.0;
    double sep_start = 0.0;  // at the first sample after the transient
    double sep_end = 0.0;
    int count_start = 0;     // at t = 0
    int count_end = 0;
    bool sep_increasing = false;     // after the transient, up to jitter
    bool sep_nonincreasing = false;  // after the transient, up to jitter
};

inline constexpr double kSingleInterfaceTol = 2.0;  // crossings closer than this count as one
inline constexpr double kSeparationJitter = 0.02;   // per-sample wiggle allowed in monotonicity

inline int interface_count(const std::array<double, 2>& x, double single_tol = kSingleInterfaceTol) {
    const bool a = std::isfinite(x[0]), b = std::isfinite(x[1]);
    if (a && b) {
        return std::abs(x[0] - x[1]) <= single_tol ? 1 : 2;
    }
    return (a || b) ? 1 : 0;
}

inline InterfaceSummary summarize_interfaces(const SpaceTimeField& f, double fit_t0, double fit_t1,
                                             double transient = 5.0) {
    if (f.trace_t.empty()) {
        throw ValidationError("summarize_interfaces: empty trace");
    }
    InterfaceSummary s;
    s.speed_u1 = fitted_speed(f.trace_t, interface_series(f, 0), fit_t0, fit_t1);
    s.speed_u2 = fitted_speed(f.trace_t, interface_series(f, 1), fit_t0, fit_t1);
    s.count_start = interface_count(f.interfaces.front());
    s.count_end = interface_count(f.interfaces.back());
    std::vector<double> sep;
    for (std::size_t i = 0; i < f.trace_t.size(); ++i) {
        if (f.trace_t[i] >= transient) {
            sep.push_back(f.interfaces[i][0] - f.interfaces[i][1]);
        }
    }
    if (sep.size() < 2 || !std::all_of(sep.begin(), sep.end(), [](double v) { return std::isfinite(v); })) {
        s.sep_start = s.sep_end = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.sep_start = sep.front();
    s.sep_end = sep.back();
    bool up = true, down = true;
    for (std::size_t i = 1; i < sep.size(); ++i) {
        up = up && sep[i] >= sep[i - 1] - kSeparationJitter;
        down = down && sep[i] <= sep[i - 1] + kSeparationJitter;
    }
    s.sep_increasing = up && s.sep_end > s.sep_start;
    s.sep_nonincreasing = down;
    return s;
}

// ---------------------------------------------------------------------------
// Export.

inline void write_norm_csv(std::ostream& os, const SpaceTimeField& f) {
    CsvWriter w(os, {"t", "norm", "log_norm"});
    for (std::size_t i = 0; i < f.trace_t.size(); ++i) {
        const double n = f.norms[i];
        w.cell(f.trace_t[i]).cell(n).cell(n > 0.0 ? std::log(n) : -std::numeric_limits<double>::infinity());
        w.end_row();
    }
}

inline void write_interface_csv(std::ostream& os, const SpaceTimeField& f) {
    CsvWriter w(os, {"t", "x_interface_u1", "x_interface_u2"});
    for (std::size_t i = 0; i < f.trace_t.size(); ++i) {
        w.cell(f.trace_t[i]).cell(f.interfaces[i][0]).cell(f.interfaces[i][1]).end_row();
    }
}

/// Row-major snapshot matrix of one component, rows = snapshot times (top row first).
inline std::vector<double> component_field(const SpaceTimeField& f, int k) {
    std::vector<double> out;
    out.reserve(f.values.size() * f.x_grid.size());
    for (const auto& row : f.values) {
        for (const auto& v : row) {
            out.push_back(v[k]);
        }
    }
    return out;
}

inline void write_field_csv(std::ostream& os, const SpaceTimeField& f) {
    CsvWriter w(os, {"t", "x", "u1", "u2"});
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        for (std::size_t j = 0; j < f.x_grid.size(); ++j) {
            w.cell(f.t_grid[i]).cell(f.x_grid[j]).cell(f.values[i][j].u1).cell(f.values[i][j].u2).end_row();
        }
    }
}

// ---------------------------------------------------------------------------
// Figure presets.

struct FigurePreset {
    std::string name;
    ScenarioConfig config;
    double fit_t0 = 0.0;  // window for interface speeds
    double fit_t1 = 0.0;
};

inline FigurePreset figure_preset(const std::string& name) {
    FigurePreset fp;
    fp.name = name;
    ScenarioConfig& c = fp.config;
    c.mode = Mode::nonlinear;
    c.dt = 0.01;
    c.trace_stride = 10;
    c.snapshot_stride = 50;
    const StatePoint e4{0.0, 0.0}, e3{1.0, 0.0};
    if (name == "fig1") {
        c.params = {4.0, 2.0, 0.75, 0.75};
        c.grid = {-250.0, 250.0, 10001};
        c.t_end = 30.0;
        c.initial.background = e4;
        c.initial.steps = {{-50.0, 50.0, e3}};
        c.initial.bumps = {{0.0, 1.0, 0.1, false, true}};
        fp.fit_t0 = 10.0;
        fp.fit_t1 = 30.0;
    } else if (name == "fig2-left") {
        c.params = {4.0, 2.0, 0.75, 0.75};
        c.grid = {-250.0, 250.0, 10001};
        c.t_end = 30.0;
        c.initial.background = e4;
        c.initial.steps = {{-50.0, 50.0, equilibria(c.params).e1}};
        fp.fit_t0 = 10.0;
        fp.fit_t1 = 30.0;
    } else if (name == "fig2-right") {
        c.params = {0.2, 2.0, 0.75, 0.75};
        c.grid = {-150.0, 150.0, 6001};
        c.t_end = 30.0;  // same horizon as fig1; later the u2 edge outruns u1 again
        c.initial.background = e4;
        c.initial.steps = {{-40.0, 40.0, e3}, {-10.0, 10.0, equilibria(c.params).e1}};
        fp.fit_t0 = 10.0;
        fp.fit_t1 = 30.0;
    } else {
        throw ValidationError("unknown preset '" + name + "' (expected fig1, fig2-left, fig2-right)");
    }
    return fp;
}

}  // namespace terrace
