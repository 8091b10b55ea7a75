#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace terrace {

/// Smooth monotone partition of the line: 0 for x <= -1, 1 for x >= 1, the normalized
/// running integral of the bump exp(-1/(1-s^2)) in between.
///
/// The running integral is tabulated once with panel-wise Gauss-Legendre quadrature and
/// evaluated by cubic Hermite interpolation against the exact derivative (the bump itself),
/// which keeps the error near machine precision.
class Cutoff {
public:
    static const Cutoff& instance() {
        static const Cutoff c;
        return c;
    }

    static double bump(double s) {
        if (s <= -1.0 || s >= 1.0) {
            return 0.0;
        }
        return std::exp(-1.0 / (1.0 - s * s));
    }

    static double bump_prime(double s) {
        if (s <= -1.0 || s >= 1.0) {
            return 0.0;
        }
        const double q = 1.0 - s * s;
        return bump(s) * (-2.0 * s / (q * q));
    }

    double value(double x) const {
        if (x <= -1.0) {
            return 0.0;
        }
        if (x >= 1.0) {
            return 1.0;
        }
        const double pos = (x + 1.0) / step_;
        std::size_t k = static_cast<std::size_t>(pos);
        if (k >= kPanels) {
            k = kPanels - 1;
        }
        const double s = pos - static_cast<double>(k);
        const double y0 = table_[k];
        const double y1 = table_[k + 1];
        const double m0 = step_ * derivative_at_node(k);
        const double m1 = step_ * derivative_at_node(k + 1);
        const double s2 = s * s;
        const double s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 +
               (s3 - s2) * m1;
    }

    double derivative(double x) const { return bump(x) / norm_; }
    double second_derivative(double x) const { return bump_prime(x) / norm_; }

    /// Total mass of the unnormalized bump on (-1, 1).
    double normalization() const { return norm_; }

private:
    static constexpr std::size_t kPanels = 2048;

    Cutoff() : step_(2.0 / static_cast<double>(kPanels)), table_(kPanels + 1, 0.0) {
        using Rule = boost::math::quadrature::gauss<double, 15>;
        std::vector<double> cumulative(kPanels + 1, 0.0);
        for (std::size_t k = 0; k < kPanels; ++k) {
            const double a = -1.0 + step_ * static_cast<double>(k);
            cumulative[k + 1] = cumulative[k] + Rule::integrate(&Cutoff::bump, a, a + step_);
        }
        norm_ = cumulative[kPanels];
        for (std::size_t k = 0; k <= kPanels; ++k) {
            table_[k] = cumulative[k] / norm_;
        }
        // exact symmetry: chi(x) + chi(-x) = 1
        for (std::size_t k = 0; k <= kPanels / 2; ++k) {
            const double avg = 0.5 * (table_[k] + 1.0 - table_[kPanels - k]);
            table_[k] = avg;
            table_[kPanels - k] = 1.0 - avg;
        }
        table_[0] = 0.0;
        table_[kPanels] = 1.0;
    }

    double derivative_at_node(std::size_t k) const {
        return bump(-1.0 + step_ * static_cast<double>(k)) / norm_;
    }

    double step_;
    double norm_ = 1.0;
    std::vector<double> table_;
};

inline double cutoff_chi(double x) { return Cutoff::instance().value(x); }
inline double cutoff_chi_prime(double x) { return Cutoff::instance().derivative(x); }
inline double cutoff_chi_second(double x) { return Cutoff::instance().second_derivative(x); }

}  // namespace terrace
