#pragma once

#include "terrace/types.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <string>

namespace terrace {

/// Parameters of the two-species cooperative system
///   u1_t = d u1_xx + r u1 (1 - u1) + alpha1 u1 u2
///   u2_t =   u2_xx +   u2 (1 - u2) + alpha2 u1 u2
struct ModelParams {
    double d = 4.0;
    double r = 2.0;
    double alpha1 = 0.75;
    double alpha2 = 0.75;

    bool positive() const { return d > 0.0 && r > 0.0 && alpha1 > 0.0 && alpha2 > 0.0; }

    /// d > 1, r > 1 and r - alpha1 alpha2 > 0.
    bool assumption_ok() const { return d > 1.0 && r > 1.0 && r - alpha1 * alpha2 > 0.0; }

    Matrix2 diffusion() const { return Matrix2::diag(d, 1.0); }

    void validate() const {
        if (!(std::isfinite(d) && std::isfinite(r) && std::isfinite(alpha1) && std::isfinite(alpha2)) ||
            !positive()) {
            std::ostringstream os;
            os << "model parameters must be finite and strictly positive (d=" << d << ", r=" << r
               << ", alpha1=" << alpha1 << ", alpha2=" << alpha2 << ")";
            throw ValidationError(os.str());
        }
    }
};

struct EquilibriumSet {
    StatePoint e1;  // coexistence
    StatePoint e2;  // species 2 only
    StatePoint e3;  // species 1 only
    StatePoint e4;  // empty

    const StatePoint& operator[](int i) const {
        switch (i) {
            case 0: return e1;
            case 1: return e2;
            case 2: return e3;
            default: return e4;
        }
    }
};

enum class Stability { stable, unstable };

inline const char* to_string(Stability s) { return s == Stability::stable ? "stable" : "unstable"; }

inline StatePoint reaction(const StatePoint& u, const ModelParams& p) {
    return {p.r * u.u1 * (1.0 - u.u1) + p.alpha1 * u.u1 * u.u2,
            u.u2 * (1.0 - u.u2) + p.alpha2 * u.u1 * u.u2};
}

/// Jacobian of the reaction term: diag(r(1-2u1), 1-2u2) plus the coupling block.
inline Matrix2 jacobian(const StatePoint& u, const ModelParams& p) {
    return {p.r * (1.0 - 2.0 * u.u1) + p.alpha1 * u.u2, p.alpha1 * u.u1,
            p.alpha2 * u.u2, 1.0 - 2.0 * u.u2 + p.alpha2 * u.u1};
}

/// Closed-form constant equilibria. Requires r - alpha1 alpha2 > 0.
inline EquilibriumSet equilibria(const ModelParams& p) {
    p.validate();
    const double denom = p.r - p.alpha1 * p.alpha2;
    if (!(denom > 0.0)) {
        throw ValidationError("equilibria: r - alpha1*alpha2 must be positive for the coexistence state");
    }
    EquilibriumSet e;
    e.e1 = {(p.r + p.alpha1) / denom, p.r * (1.0 + p.alpha2) / denom};
    e.e2 = {0.0, 1.0};
    e.e3 = {1.0, 0.0};
    e.e4 = {0.0, 0.0};
    return e;
}

inline constexpr double kClassifyTol = 1e-12;

/// Spectral stability of a constant equilibrium from the eigenvalues of its Jacobian.
inline Stability classify_equilibrium(const StatePoint& e, const ModelParams& p) {
    const StatePoint g = reaction(e, p);
    const double scale = 1.0 + max_abs(e) * max_abs(e);
    if (!(max_abs(g) <= 1e-9 * scale)) {
        std::ostringstream os;
        os << "classify_equilibrium: (" << e.u1 << ", " << e.u2 << ") is not an equilibrium (|g| = "
           << max_abs(g) << ")";
        throw ValidationError(os.str());
    }
    const auto ev = jacobian(e, p).eigenvalues();
    return (ev[0].real() < -kClassifyTol && ev[1].real() < -kClassifyTol) ? Stability::stable
                                                                           : Stability::unstable;
}

}  // namespace terrace
