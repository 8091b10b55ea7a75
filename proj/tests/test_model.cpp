#include "terrace/model.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace terrace;

namespace {

// Central differences are exact for quadratic maps, whatever the step.
Matrix2 fd_jacobian(const StatePoint& u, const ModelParams& p) {
    const double h = 0.5;
    const StatePoint a = (1.0 / (2.0 * h)) * (reaction(u + StatePoint{h, 0.0}, p) - reaction(u - StatePoint{h, 0.0}, p));
    const StatePoint b = (1.0 / (2.0 * h)) * (reaction(u + StatePoint{0.0, h}, p) - reaction(u - StatePoint{0.0, h}, p));
    return {a.u1, b.u1, a.u2, b.u2};
}

// Interior equilibrium from the linear system left after dividing out u1, u2.
StatePoint coexistence_by_solve(const ModelParams& p) {
    Eigen::Matrix2d m;
    m << p.r, -p.alpha1, -p.alpha2, 1.0;
    const Eigen::Vector2d v = m.fullPivLu().solve(Eigen::Vector2d(p.r, 1.0));
    return {v(0), v(1)};
}

bool stable_by_trace_det(const Matrix2& j) { return j.trace() < 0.0 && j.det() > 0.0; }

ModelParams random_admissible(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(1.01, 10.0), r(1.01, 5.0), a(0.01, 1.5);
    while (true) {
        ModelParams p{d(rng), r(rng), a(rng), a(rng)};
        if (p.assumption_ok()) {
            return p;
        }
    }
}

}  // namespace

TEST(Equilibria, ReferenceParameters) {
    const auto e = equilibria({4.0, 2.0, 0.75, 0.75});
    EXPECT_NEAR(e.e1.u1, 1.9130434782608696, 1e-12);
    EXPECT_NEAR(e.e1.u2, 2.4347826086956523, 1e-12);
    EXPECT_EQ(e.e2.u1, 0.0);
    EXPECT_EQ(e.e2.u2, 1.0);
    EXPECT_EQ(e.e3.u1, 1.0);
    EXPECT_EQ(e.e4.u2, 0.0);
}

TEST(Equilibria, AllAreZerosOfTheReaction) {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_admissible(rng);
        const auto e = equilibria(p);
        for (int i = 0; i < 4; ++i) {
            EXPECT_LT(max_abs(reaction(e[i], p)), 1e-12);
        }
        const StatePoint s = coexistence_by_solve(p);
        EXPECT_NEAR(e.e1.u1, s.u1, 1e-12 * (1 + std::abs(s.u1)));
        EXPECT_NEAR(e.e1.u2, s.u2, 1e-12 * (1 + std::abs(s.u2)));
    }
}

TEST(Equilibria, RejectsNonPositiveCoexistenceDenominator) {
    EXPECT_THROW(equilibria({4.0, 1.0, 2.0, 2.0}), ValidationError);
    EXPECT_THROW(equilibria({-1.0, 2.0, 0.75, 0.75}), ValidationError);
}

TEST(Jacobian, MatchesExactDifferences) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 3.0);
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_admissible(rng);
        const StatePoint x{u(rng), u(rng)};
        const Matrix2 a = jacobian(x, p), b = fd_jacobian(x, p);
        EXPECT_NEAR(a.a11, b.a11, 1e-12);
        EXPECT_NEAR(a.a12, b.a12, 1e-12);
        EXPECT_NEAR(a.a21, b.a21, 1e-12);
        EXPECT_NEAR(a.a22, b.a22, 1e-12);
    }
}

TEST(Jacobian, ClosedFormsAtTheEquilibria) {
    const ModelParams p{4.0, 2.0, 0.75, 0.75};
    const auto e = equilibria(p);
    const Matrix2 j4 = jacobian(e.e4, p);
    EXPECT_DOUBLE_EQ(j4.a11, p.r);
    EXPECT_DOUBLE_EQ(j4.a22, 1.0);
    const Matrix2 j3 = jacobian(e.e3, p);
    EXPECT_DOUBLE_EQ(j3.a11, -p.r);
    EXPECT_DOUBLE_EQ(j3.a12, p.alpha1);
    EXPECT_DOUBLE_EQ(j3.a22, 1.0 + p.alpha2);
    const Matrix2 j2 = jacobian(e.e2, p);
    EXPECT_DOUBLE_EQ(j2.a11, p.r + p.alpha1);
    EXPECT_DOUBLE_EQ(j2.a21, p.alpha2);
    EXPECT_DOUBLE_EQ(j2.a22, -1.0);
    // at the interior state the Jacobian is -diag(u) times the interaction matrix
    const Matrix2 j1 = jacobian(e.e1, p);
    EXPECT_NEAR(j1.a11, -p.r * e.e1.u1, 1e-12);
    EXPECT_NEAR(j1.a12, p.alpha1 * e.e1.u1, 1e-12);
    EXPECT_NEAR(j1.a21, p.alpha2 * e.e1.u2, 1e-12);
    EXPECT_NEAR(j1.a22, -e.e1.u2, 1e-12);
}

TEST(Classification, OneStableThreeUnstable) {
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_admissible(rng);
        const auto e = equilibria(p);
        EXPECT_EQ(classify_equilibrium(e.e1, p), Stability::stable);
        for (int i = 1; i < 4; ++i) {
            EXPECT_EQ(classify_equilibrium(e[i], p), Stability::unstable);
        }
        for (int i = 0; i < 4; ++i) {
            EXPECT_EQ(classify_equilibrium(e[i], p) == Stability::stable, stable_by_trace_det(jacobian(e[i], p)));
        }
    }
}

TEST(Classification, RejectsNonEquilibrium) {
    EXPECT_THROW(classify_equilibrium({0.5, 0.5}, ModelParams{}), ValidationError);
}

TEST(Matrix2, EigenvaluesAgreeWithEigen) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 50; ++k) {
        const Matrix2 m{u(rng), u(rng), u(rng), u(rng)};
        Eigen::Matrix2d e;
        e << m.a11, m.a12, m.a21, m.a22;
        const auto ref = e.eigenvalues();
        const auto ev = m.eigenvalues();
        const double s1 = std::abs(ev[0] - ref(0)) + std::abs(ev[1] - ref(1));
        const double s2 = std::abs(ev[0] - ref(1)) + std::abs(ev[1] - ref(0));
        EXPECT_LT(std::min(s1, s2), 1e-12);
    }
}
