#pragma once

// Ready-made weighted-stability setups shared by the CLI, tests and acceptance runs.

#include "terrace/evolve.hpp"
#include "terrace/speeds.hpp"
#include "terrace/weights.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace terrace {

struct WeightedCase {
    ModelParams params;
    SpeedCertificate cert;
    WeightSpec weight;
    std::shared_ptr<const SuperpositionSpec> spec;
};

/// Profile domain wide enough for the slow tail of a front at speed c.
inline ProfileDomain default_profile_domain(double c) {
    return c >= 10.0 ? ProfileDomain{250.0, 10000} : ProfileDomain{100.0, 4000};
}

/// Fronts, certificate and anchored superposition. With kappa2 set the weight takes the
/// given rates verbatim (certificate only reported), which allows infeasible weights.
inline WeightedCase make_weighted_case(const ModelParams& p, double c1, double c2, std::optional<double> kappa1,
                                       std::optional<double> kappa2, double psi1, double psi2,
                                       std::optional<ProfileDomain> dom1 = std::nullopt,
                                       std::optional<ProfileDomain> dom2 = std::nullopt) {
    WeightedCase wc;
    wc.params = p;
    wc.cert = certificate(c1, c2, p, kappa1);
    if (kappa2) {
        if (!kappa1) {
            throw ValidationError("make_weighted_case: kappa2 needs kappa1");
        }
        wc.weight = WeightSpec{c1, c2, *kappa1, *kappa2, psi1, psi2};
        wc.weight.validate();
    } else {
        if (!(std::isfinite(wc.cert.kappa1) && std::isfinite(wc.cert.kappa2))) {
            throw ValidationError("make_weighted_case: no admissible rates (" + wc.cert.describe() +
                                  "); give kappa1 and kappa2 explicitly");
        }
        wc.weight = WeightSpec::from(wc.cert, psi1, psi2);
    }
    const FrontProfile f1 = system_front(c1, p, FrontEnds::e1_e3, dom1.value_or(default_profile_domain(c1)));
    const FrontProfile f2 = kpp_profile(c2, p.d, p.r, dom2.value_or(default_profile_domain(c2)));
    wc.spec = std::make_shared<SuperpositionSpec>(
        anchored_superposition(f1, f2, psi1, psi2, default_epsilon(wc.weight, p)));
    return wc;
}

/// The feasible reference case: alpha = 0.05, (c1, c2) = (3, 13.2), kappa1 = 0.7929.
inline WeightedCase compliant_case() {
    return make_weighted_case({4.0, 2.0, 0.05, 0.05}, 3.0, 13.2, 0.7929, std::nullopt, -10.0, 10.0);
}

/// Rates chosen by hand for (c1, c2) = (3, 6), where the interaction inequality fails.
inline WeightedCase forced_case() {
    return make_weighted_case({4.0, 2.0, 0.05, 0.05}, 3.0, 6.0, 0.8, 0.75, -10.0, 10.0);
}

struct BumpPreset {
    std::string name;
    double center = 0.0;
};

/// "between": midway between the two fronts at t = 0. "leading": on the fast front,
/// where the first component of the ansatz crosses 1/2.
inline std::vector<BumpPreset> bump_presets(const SuperpositionSpec& s) {
    SpaceGrid g{s.psi1 - 50.0, s.psi2 + 200.0, 25001};
    std::vector<StatePoint> u(g.points);
    for (std::size_t i = 0; i < g.points; ++i) {
        u[i] = superpose(s, 0.0, g.x(i));
    }
    return {{"between", 0.5 * (s.psi1 + s.psi2)}, {"leading", rightmost_crossing(u, g, 0, 0.5)}};
}

inline BumpPreset bump_preset(const SuperpositionSpec& s, const std::string& name) {
    for (const auto& b : bump_presets(s)) {
        if (b.name == name) {
            return b;
        }
    }
    throw ValidationError("unknown bump '" + name + "' (expected between, leading)");
}

/// Weighted linear run from a unit-norm Gaussian bump (width 2, both components).
inline ScenarioConfig weighted_scenario(const WeightedCase& wc, double bump_center, const SpaceGrid& grid,
                                        double t_end, double dt) {
    ScenarioConfig c;
    c.params = wc.params;
    c.mode = Mode::weighted_linear;
    c.spec = wc.spec;
    c.weight = wc.weight;
    c.grid = grid;
    c.t_end = t_end;
    c.dt = dt;
    c.startup_steps = 0;  // smooth data
    c.trace_stride = 10;
    c.snapshot_stride = 100;
    c.initial.bumps = {{bump_center, 2.0, 1.0, true, true}};
    c.initial.normalize_l2 = true;
    return c;
}

struct ConsistencyReport {
    double relative = 0.0;          // extrapolated, ||w - v/omega|| / ||w||
    double relative_plain = 0.0;    // same on the finest grid without extrapolation
    std::vector<double> spacings;
};

/// Evolves w directly and v = omega w through the unweighted linearization, then compares
/// w with v / omega at t. Both runs share grid, dt and Dirichlet ends; each is Romberg
/// extrapolated over three nested grids (dx, dx/2, dx/4; dt proportional to dx) before
/// the comparison, so what remains measures the formulations, not the truncation error.
inline ConsistencyReport weighted_consistency(const WeightedCase& wc, double bump_center, double t, double x_lo,
                                              double x_hi, double dx, double dt_over_dx = 0.1) {
    const double len = x_hi - x_lo;
    const auto cells = static_cast<std::size_t>(std::llround(len / dx));
    if (cells < 8 || std::abs(static_cast<double>(cells) * dx - len) > 1e-9 * len) {
        throw ValidationError("weighted_consistency: dx must divide the domain");
    }
    ConsistencyReport rep;
    std::vector<std::vector<StatePoint>> W, V;
    for (int l = 0; l < 3; ++l) {
        const double h = dx / static_cast<double>(1 << l);
        rep.spacings.push_back(h);
        SpaceGrid g{x_lo, x_hi, cells * (std::size_t{1} << l) + 1};
        ScenarioConfig cw = weighted_scenario(wc, bump_center, g, t, h * dt_over_dx);
        cw.trace_stride = cw.snapshot_stride = std::max<std::size_t>(cw.steps(), 1);
        const auto w0 = cw.initial.sample(g);
        std::vector<StatePoint> v0(g.points);
        for (std::size_t i = 0; i < g.points; ++i) {
            v0[i] = std::exp(phi(0.0, g.x(i), wc.weight).value) * w0[i];
        }
        ScenarioConfig cu = cw;
        cu.mode = Mode::linear_at_ansatz;
        cu.weight.reset();
        W.push_back(simulate(cw, w0).values.back());
        auto v = simulate(cu, v0).values.back();
        for (std::size_t i = 0; i < g.points; ++i) {
            v[i] = std::exp(-phi(t, g.x(i), wc.weight).value) * v[i];
        }
        V.push_back(std::move(v));
    }
    auto romberg = [](const std::vector<std::vector<StatePoint>>& L, std::size_t i) {
        const StatePoint r1 = (4.0 / 3.0) * L[1][2 * i] - (1.0 / 3.0) * L[0][i];
        const StatePoint r2 = (4.0 / 3.0) * L[2][4 * i] - (1.0 / 3.0) * L[1][2 * i];
        return (16.0 / 15.0) * r2 - (1.0 / 15.0) * r1;
    };
    double num = 0.0, den = 0.0, num_plain = 0.0, den_plain = 0.0;
    for (std::size_t i = 0; i < W[0].size(); ++i) {
        const StatePoint a = romberg(W, i);
        const StatePoint d = a - romberg(V, i);
        num += d.u1 * d.u1 + d.u2 * d.u2;
        den += a.u1 * a.u1 + a.u2 * a.u2;
    }
    for (std::size_t i = 0; i < W[2].size(); ++i) {
        const StatePoint d = W[2][i] - V[2][i];
        num_plain += d.u1 * d.u1 + d.u2 * d.u2;
        den_plain += W[2][i].u1 * W[2][i].u1 + W[2][i].u2 * W[2][i].u2;
    }
    rep.relative = std::sqrt(num / den);
    rep.relative_plain = std::sqrt(num_plain / den_plain);
    return rep;
}

}  // namespace terrace
