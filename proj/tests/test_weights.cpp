#include "terrace/scenarios.hpp"
#include "terrace/weights.hpp"

#include <gtest/gtest.h>

using namespace terrace;

namespace {

const WeightedCase& compliant() {
    static const WeightedCase wc = compliant_case();
    return wc;
}

const WeightedCase& forced() {
    static const WeightedCase wc = forced_case();
    return wc;
}

const TimeSpaceGrid kCoarse{0.0, 20.0, 0.25, -60.0, 320.0, 0.1};

}  // namespace

TEST(Weight, RegionsAndBoundaries) {
    const WeightSpec w{3.0, 13.2, 0.8, 1.65, -10.0, 10.0};
    EXPECT_EQ(classify_region(0.0, -11.0, w), Region::I1);
    EXPECT_EQ(classify_region(0.0, -10.5, w), Region::I2);
    EXPECT_EQ(classify_region(0.0, -9.0, w), Region::I3);
    EXPECT_EQ(classify_region(0.0, 9.0, w), Region::I3);
    EXPECT_EQ(classify_region(0.0, 9.5, w), Region::I4);
    EXPECT_EQ(classify_region(0.0, 11.0, w), Region::I5);
    EXPECT_EQ(classify_region(1.0, 11.0, w), Region::I3);  // fast front has moved on
}

TEST(Weight, PhiIsC1AndJetMatchesDifferences) {
    const WeightSpec w{3.0, 13.2, 0.8, 1.65, -10.0, 10.0};
    const double t = 0.7, h = 1e-6;
    for (double edge : {-1.0, 1.0}) {
        for (double base : {w.c1 * t + w.psi1, w.c2 * t + w.psi2}) {
            const double x = base + edge;
            const PhiJet a = phi(t, x - 1e-9, w), b = phi(t, x + 1e-9, w);
            EXPECT_NEAR(a.value, b.value, 1e-7);
            EXPECT_NEAR(a.x, b.x, 1e-7);
        }
    }
    for (double x : {-15.0, -10.3, -2.0, 15.4, 25.0}) {
        const PhiJet j = phi(t, x, w);
        EXPECT_NEAR(j.x, (phi(t, x + h, w).value - phi(t, x - h, w).value) / (2 * h), 1e-6);
        EXPECT_NEAR(j.t, (phi(t + h, x, w).value - phi(t - h, x, w).value) / (2 * h), 1e-5);
    }
}

TEST(Weight, ScalarWeightAheadOfFront) {
    const FrontProfile f = kpp_profile(6.0, 4.0, 2.0, {100.0, 4000});
    // far ahead p ~ 0, so the coefficient is d k^2 - c k + r
    const double k = 0.75;
    EXPECT_NEAR(scalar_a0(0.0, 80.0, 6.0, k, f, 4.0, 2.0), 4 * k * k - 6 * k + 2, 1e-8);
    EXPECT_NEAR(scalar_a0(0.0, -80.0, 6.0, k, f, 4.0, 2.0), -2.0, 1e-8);
}

TEST(Weight, CompliantCaseKeepsDiagonalNegative) {
    const DiagBoundReport rep = diag_bound_check(*compliant().spec, compliant().weight, compliant().params, kCoarse);
    EXPECT_GT(rep.eta, 0.0);
    for (std::size_t r = 0; r < 5; ++r) {
        EXPECT_GT(rep.region_count[r], 0u);
        EXPECT_LT(rep.region_max[r], 0.0);
    }
}

TEST(Weight, ForcedCaseFailsInRegionFive) {
    const WeightedCase& wc = forced();
    EXPECT_FALSE(wc.cert.feasible());
    const DiagBoundReport rep = diag_bound_check(*wc.spec, wc.weight, wc.params, kCoarse);
    EXPECT_LT(rep.eta, 0.0);
    EXPECT_EQ(rep.region, Region::I5);
    EXPECT_EQ(rep.entry, 0);
    // ahead of both fronts u = e4 and the first diagonal entry is
    // r + k1 (c2 - c1) - k2 c2 + d k2^2
    const auto& w = wc.weight;
    const auto& p = wc.params;
    const double closed = p.r + w.kappa1 * (w.c2 - w.c1) - w.kappa2 * w.c2 + p.d * w.kappa2 * w.kappa2;
    EXPECT_NEAR(-rep.eta, closed, 1e-6);
    EXPECT_NEAR(-rep.eta, 2.13, 0.1);
}

TEST(Weight, AlphaThresholdBisection) {
    auto eta = [](double a) { return 0.3 - a; };
    EXPECT_NEAR(alpha_threshold(eta, 0.0, 1.0, 1e-6), 0.3, 1e-6);
    EXPECT_DOUBLE_EQ(alpha_threshold(eta, 0.0, 0.2), 0.2);
    EXPECT_THROW(alpha_threshold(eta, 0.5, 1.0), ValidationError);
}

TEST(Weight, EpsilonAndValidation) {
    const auto& w = compliant().weight;
    const double eps = default_epsilon(w, compliant().params);
    EXPECT_GT(eps, 0.0);
    EXPECT_LE(eps, 0.1);
    EXPECT_THROW((WeightSpec{3.0, 2.0, 0.5, 0.5, -10.0, 10.0}.validate()), ValidationError);
    EXPECT_THROW((WeightSpec{3.0, 6.0, 0.5, 0.5, 0.0, 1.0}.validate()), ValidationError);
    EXPECT_THROW(make_weighted_case({4.0, 2.0, 0.05, 0.05}, 1.5, 13.2, std::nullopt, std::nullopt, -10.0, 10.0),
                 ValidationError);
}

TEST(Weight, AnchoredSuperpositionGeometry) {
    const auto& s = *compliant().spec;
    // p1 stays >= 1 up to xi = 1, p2 sits at 1 - eps there
    const double eps = default_epsilon(compliant().weight, compliant().params);
    EXPECT_NEAR(s.p2.at(1.0).u1, 1.0 - eps, 1e-12);
    EXPECT_GE(s.p1.at(0.99).u1, 1.0 - 1e-9);
    EXPECT_GE(s.p1.at(0.99).u2, 1.0 - 1e-9);
}
