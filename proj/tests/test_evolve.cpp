#include "terrace/evolve.hpp"
#include "terrace/scenarios.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace terrace;

namespace {

const ModelParams kRef{4.0, 2.0, 0.75, 0.75};

ScenarioConfig nonlinear_config(const SpaceGrid& g, double t_end, double dt) {
    ScenarioConfig c;
    c.params = kRef;
    c.grid = g;
    c.t_end = t_end;
    c.dt = dt;
    c.trace_stride = 10;
    c.snapshot_stride = 10;
    return c;
}

const WeightedCase& compliant() {
    static const WeightedCase wc = compliant_case();
    return wc;
}

}  // namespace

TEST(Evolve, EquilibriaAreFixed) {
    const auto eq = equilibria(kRef);
    for (int k = 0; k < 4; ++k) {
        ScenarioConfig c = nonlinear_config({-20.0, 20.0, 401}, 1.0, 0.01);
        c.initial.background = eq[k];
        const SpaceTimeField f = simulate(c);
        for (const auto& u : f.values.back()) {
            ASSERT_LT(max_abs(u - eq[k]), 1e-12) << "equilibrium " << k;
        }
    }
}

TEST(Evolve, HomogeneousDataFollowsLogisticOde) {
    // u = (delta, 0) stays flat away from the pinned ends and solves u' = r u (1 - u)
    const double delta = 1e-3;
    ScenarioConfig c = nonlinear_config({-60.0, 60.0, 201}, 2.0, 0.01);
    c.initial.background = {delta, 0.0};
    const SpaceTimeField f = simulate(c);
    for (std::size_t s = 0; s < f.t_grid.size(); ++s) {
        const double t = f.t_grid[s];
        const double exact = 1.0 / (1.0 + (1.0 / delta - 1.0) * std::exp(-kRef.r * t));
        EXPECT_NEAR(f.values[s][100].u1, exact, 1e-10 * (1.0 + exact));
        EXPECT_EQ(f.values[s][100].u2, 0.0);
    }
    // early on the perturbation of e4 grows like e^{r t}
    EXPECT_NEAR(f.values[1][100].u1 / delta, std::exp(kRef.r * 0.1), 1e-3);
}

TEST(Evolve, SingleModeMatchesSchemeAmplification) {
    // near e4 a tiny mode u1 = eps sin(kx) obeys w_t = d w_xx + r w (no cancellation
    // against an O(1) background, which would cost digits)
    // Per step: RK4 half reaction, Crank-Nicolson on the Laplacian symbol, RK4 half reaction.
    const double L = 20.0, eps = 1e-9, dt = 0.005;
    const std::size_t n = 801;
    ScenarioConfig c = nonlinear_config({0.0, L, n}, 1.0, dt);
    c.startup_steps = 0;
    const double k = 2.0 * std::numbers::pi / L * 3.0;
    std::vector<StatePoint> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = {eps * std::sin(k * c.grid.x(i)), 0.0};
    }
    const SpaceTimeField f = simulate(c, u);
    const double h = c.grid.step();
    const double z = dt * kRef.d * (2.0 * std::cos(k * h) - 2.0) / (h * h);
    const double y = kRef.r * dt / 2.0;
    const double rk4 = 1.0 + y + y * y / 2.0 + y * y * y / 6.0 + y * y * y * y / 24.0;
    const double g = rk4 * rk4 * (1.0 + z / 2.0) / (1.0 - z / 2.0);
    const double expected = std::pow(g, static_cast<double>(c.steps()));
    const std::size_t mid = n / 4 + 3;
    const double got = f.values.back()[mid].u1 / (eps * std::sin(k * c.grid.x(mid)));
    EXPECT_NEAR(got, expected, 1e-6 * expected);
    // and the scheme is close to the continuous factor
    EXPECT_NEAR(got, std::exp((z / dt + 2.0 * y / dt) * 1.0), 2e-3 * expected);
}

TEST(Evolve, ZeroPerturbationStaysZero) {
    for (Mode m : {Mode::linear_at_ansatz, Mode::weighted_linear}) {
        ScenarioConfig c = weighted_scenario(compliant(), 0.0, {-50.0, 150.0, 2001}, 1.0, 0.01);
        c.mode = m;
        if (m == Mode::linear_at_ansatz) {
            c.weight.reset();
        }
        const SpaceTimeField f = simulate(c, std::vector<StatePoint>(c.grid.points));
        for (const auto& v : f.values.back()) {
            ASSERT_EQ(v, StatePoint{});
        }
    }
}

TEST(Evolve, LinearModesScaleLinearly) {
    ScenarioConfig c = weighted_scenario(compliant(), 0.0, {-50.0, 150.0, 2001}, 1.0, 0.01);
    const auto w0 = c.initial.sample(c.grid);
    std::vector<StatePoint> w3(w0);
    for (auto& v : w3) {
        v *= 3.0;
    }
    const auto a = simulate(c, w0).values.back();
    const auto b = simulate(c, w3).values.back();
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_LT(max_abs(b[i] - 3.0 * a[i]), 1e-12 * (1.0 + max_abs(b[i])));
    }
}

TEST(Evolve, QuadraticRemainder) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const StatePoint ubar{u(rng), u(rng)}, v{u(rng), u(rng)};
        EXPECT_EQ(quadratic_remainder(ubar, {}, kRef), StatePoint{});
        const StatePoint q = quadratic_remainder(ubar, v, kRef);
        const StatePoint q2 = quadratic_remainder(ubar, 2.0 * v, kRef);
        EXPECT_LT(max_abs(q2 - 4.0 * q), 1e-12);
        const StatePoint direct = reaction(ubar + v, kRef) - reaction(ubar, kRef) - jacobian(ubar, kRef) * v;
        EXPECT_LT(max_abs(direct - q), 1e-12);
    }
}

TEST(Evolve, ComparisonPrinciple) {
    // both interactions are cooperative, so the componentwise order is preserved
    const SpaceGrid g{-40.0, 40.0, 801};
    ScenarioConfig c = nonlinear_config(g, 5.0, 0.01);
    std::vector<StatePoint> lo(g.points), hi(g.points);
    for (std::size_t i = 0; i < g.points; ++i) {
        const double x = g.x(i);
        const double s = 0.5 * (1.0 - std::tanh(0.5 * x));
        lo[i] = {0.8 * s, 0.6};
        hi[i] = {s, 0.6 + 0.3 * std::exp(-0.05 * x * x)};
    }
    const auto a = simulate(c, lo).values, b = simulate(c, hi).values;
    for (std::size_t s = 0; s < a.size(); ++s) {
        for (std::size_t i = 0; i < g.points; ++i) {
            ASSERT_LE(a[s][i].u1, b[s][i].u1 + 1e-10);
            ASSERT_LE(a[s][i].u2, b[s][i].u2 + 1e-10);
        }
    }
}

TEST(Evolve, DirichletEndsHold) {
    ScenarioConfig c = nonlinear_config({-30.0, 30.0, 601}, 3.0, 0.01);
    c.initial.background = {0.0, 0.2};
    c.initial.steps = {{-100.0, 0.0, {1.0, 0.0}}};
    const SpaceTimeField f = simulate(c);
    EXPECT_EQ(f.values.back().front(), (StatePoint{1.0, 0.0}));
    EXPECT_EQ(f.values.back().back(), (StatePoint{0.0, 0.2}));
}

TEST(Evolve, GridConvergenceOfInterfaceSpeeds) {
    // fig1 setup on a shorter window; halving dx and dt moves the speeds by < 2%
    FigurePreset fp = figure_preset("fig1");
    std::array<InterfaceSummary, 2> s;
    for (int l = 0; l < 2; ++l) {
        ScenarioConfig c = fp.config;
        c.grid = {-60.0, 140.0, l == 0 ? 2001u : 4001u};
        c.dt = l == 0 ? 0.02 : 0.01;
        c.t_end = 16.0;
        c.trace_stride = l == 0 ? 5 : 10;
        c.snapshot_stride = 1000000;
        s[l] = summarize_interfaces(simulate(c), 6.0, 16.0);
    }
    EXPECT_LT(std::abs(s[0].speed_u1 / s[1].speed_u1 - 1.0), 0.02);
    EXPECT_LT(std::abs(s[0].speed_u2 / s[1].speed_u2 - 1.0), 0.02);
}

TEST(Residual, ExactSingleFrontVanishesAtNodes) {
    const FrontProfile p1 = system_front(3.0, kRef, FrontEnds::e1_e3, {100.0, 4001});
    const FrontProfile e3 = FrontProfile::constant({1.0, 0.0}, 6.0, {100.0, 4001});
    const SuperpositionSpec s = make_superposition(p1, e3, -20.0, 20.0);
    std::vector<double> xs;
    for (std::size_t i = 400; i + 400 < p1.size(); ++i) {
        xs.push_back(p1.xi(i) + s.psi1);
    }
    const auto r = residual_field(s, 0.0, xs, kRef, AnsatzVariant::additive);
    double m = 0.0;
    for (const auto& v : r) {
        m = std::max(m, max_abs(v));
    }
    EXPECT_LE(m, 1e-6);
    // the cutoff variant only differs where chi varies, far ahead of p1
    const auto rc = residual_field(s, 0.0, xs, kRef, AnsatzVariant::cutoff);
    double mc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] < -5.0) {
            mc = std::max(mc, max_abs(rc[i]));
        }
    }
    EXPECT_LE(mc, 1e-6);
}

TEST(Residual, WeightedResidualDecaysInTime) {
    const auto& wc = compliant();
    std::vector<double> xs;
    for (double x = -100.0; x <= 400.0; x += 0.05) {
        xs.push_back(x);
    }
    std::vector<double> ts, logs;
    for (double t : {4.0, 6.0, 8.0, 10.0}) {
        ts.push_back(t);
        logs.push_back(weighted_residual_log_sup(*wc.spec, wc.weight, t, xs, wc.params));
    }
    // least-squares slope of log sup |R / omega| is negative, i.e. a positive decay rate
    const double slope = fitted_speed(ts, logs, 0.0, 100.0);
    EXPECT_LT(slope, 0.0);
}

TEST(DecayFit, RecoversExponential) {
    std::vector<double> t, y;
    for (int i = 0; i <= 400; ++i) {
        t.push_back(0.1 * i);
        y.push_back(3.0 * std::exp(-0.2 * t.back()));
    }
    const DecayFit f = decay_fit(t, y, 5.0, 40.0);
    EXPECT_NEAR(f.eta, 0.2, 1e-12);
    EXPECT_NEAR(f.c, 3.0, 1e-10);
    EXPECT_NEAR(f.c_relative, 1.0, 1e-10);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    EXPECT_EQ(f.samples, 351u);
}

TEST(DecayFit, ConstantTraceHasZeroRate) {
    std::vector<double> t, y;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.1 * i);
        y.push_back(0.7);
    }
    const DecayFit f = decay_fit(t, y, 0.0, 10.0);
    EXPECT_NEAR(f.eta, 0.0, 1e-12);
    EXPECT_THROW(decay_fit(t, y, 20.0, 30.0), Error);
}

TEST(DecayFit, StopsAtUnderflow) {
    std::vector<double> t, y;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(i);
        y.push_back(i < 60 ? std::exp(-0.5 * i) : 0.0);
    }
    const DecayFit f = decay_fit(t, y, 10.0, 100.0);
    EXPECT_NEAR(f.eta, 0.5, 1e-12);
    EXPECT_LT(f.t1, 60.0);
}

TEST(Interfaces, SyntheticTracks) {
    SpaceTimeField f;
    for (int i = 0; i <= 300; ++i) {
        const double t = 0.1 * i;
        f.trace_t.push_back(t);
        f.interfaces.push_back({5.0 * t + 1.0, 3.0 * t});
    }
    const InterfaceSummary s = summarize_interfaces(f, 10.0, 30.0);
    EXPECT_NEAR(s.speed_u1, 5.0, 1e-12);
    EXPECT_NEAR(s.speed_u2, 3.0, 1e-12);
    EXPECT_EQ(s.count_start, 1);
    EXPECT_EQ(s.count_end, 2);
    EXPECT_TRUE(s.sep_increasing);
    EXPECT_FALSE(s.sep_nonincreasing);

    for (std::size_t i = 0; i < f.trace_t.size(); ++i) {
        const double t = f.trace_t[i];
        f.interfaces[i] = {3.0 * t + std::max(0.0, 20.0 - t), 3.0 * t};
    }
    const InterfaceSummary c = summarize_interfaces(f, 10.0, 30.0);
    EXPECT_EQ(c.count_start, 2);
    EXPECT_EQ(c.count_end, 1);
    EXPECT_TRUE(c.sep_nonincreasing);
    EXPECT_FALSE(c.sep_increasing);
}

TEST(Interfaces, CountRules) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    EXPECT_EQ(interface_count({nan, nan}), 0);
    EXPECT_EQ(interface_count({1.0, nan}), 1);
    EXPECT_EQ(interface_count({1.0, 2.5}), 1);
    EXPECT_EQ(interface_count({1.0, 3.5}), 2);
}

TEST(Interfaces, RightmostCrossingInterpolates) {
    const SpaceGrid g{0.0, 10.0, 11};
    std::vector<StatePoint> u(11);
    for (std::size_t i = 0; i < 11; ++i) {
        u[i] = {1.0 - 0.1 * static_cast<double>(i), 0.0};
    }
    EXPECT_NEAR(rightmost_crossing(u, g, 0, 0.55), 4.5, 1e-12);
    EXPECT_TRUE(std::isnan(rightmost_crossing(u, g, 1, 0.5)));
}

TEST(Config, ValidationCollectsProblems) {
    ScenarioConfig c;
    c.dt = -1.0;
    c.mode = Mode::weighted_linear;
    try {
        c.validate();
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        const std::string m = e.what();
        EXPECT_NE(m.find("dt"), std::string::npos);
        EXPECT_NE(m.find("weight"), std::string::npos);
    }
    ScenarioConfig x = nonlinear_config({-10.0, 10.0, 2001}, 1.0, 0.01);
    x.diffusion = DiffusionScheme::explicit_euler;
    EXPECT_THROW(x.validate(), ValidationError);
    x.dt = 5e-6;
    x.t_end = 1e-4;
    EXPECT_NO_THROW(x.validate());
}

TEST(Presets, KnownNames) {
    const ModelParams p = figure_preset("fig1").config.params;
    EXPECT_EQ(p.d, 4.0);
    EXPECT_EQ(p.r, 2.0);
    EXPECT_EQ(p.alpha1, 0.75);
    EXPECT_EQ(p.alpha2, 0.75);
    EXPECT_DOUBLE_EQ(figure_preset("fig2-right").config.params.d, 0.2);
    EXPECT_THROW(figure_preset("fig3"), ValidationError);
}

TEST(Evolve, BlowUpIsNumericalError) {
    ScenarioConfig c = nonlinear_config({-10.0, 10.0, 201}, 5.0, 0.5);
    c.initial.background = {-50.0, -50.0};
    EXPECT_THROW(simulate(c), NumericalError);
}
