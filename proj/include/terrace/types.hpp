#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace terrace {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: parameters, configs, preconditions. CLI exit status 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed (divergence, blow-up, eigensolver). CLI exit status 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Two-species state (u1, u2).
struct StatePoint {
    double u1 = 0.0;
    double u2 = 0.0;

    constexpr double& operator[](int i) { return i == 0 ? u1 : u2; }
    constexpr double operator[](int i) const { return i == 0 ? u1 : u2; }

    constexpr StatePoint& operator+=(const StatePoint& o) {
        u1 += o.u1;
        u2 += o.u2;
        return *this;
    }
    constexpr StatePoint& operator-=(const StatePoint& o) {
        u1 -= o.u1;
        u2 -= o.u2;
        return *this;
    }
    constexpr StatePoint& operator*=(double s) {
        u1 *= s;
        u2 *= s;
        return *this;
    }
    friend constexpr StatePoint operator+(StatePoint a, const StatePoint& b) { return a += b; }
    friend constexpr StatePoint operator-(StatePoint a, const StatePoint& b) { return a -= b; }
    friend constexpr StatePoint operator*(double s, StatePoint a) { return a *= s; }
    friend constexpr StatePoint operator*(StatePoint a, double s) { return a *= s; }
    friend constexpr bool operator==(const StatePoint&, const StatePoint&) = default;

    bool finite() const { return std::isfinite(u1) && std::isfinite(u2); }
};

inline double max_abs(const StatePoint& p) { return std::max(std::abs(p.u1), std::abs(p.u2)); }

/// Real 2x2 matrix, row-major.
struct Matrix2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    static constexpr Matrix2 diag(double x, double y) { return {x, 0.0, 0.0, y}; }
    static constexpr Matrix2 identity() { return diag(1.0, 1.0); }

    constexpr double trace() const { return a11 + a22; }
    constexpr double det() const { return a11 * a22 - a12 * a21; }

    constexpr StatePoint operator*(const StatePoint& v) const {
        return {a11 * v.u1 + a12 * v.u2, a21 * v.u1 + a22 * v.u2};
    }
    constexpr Matrix2& operator+=(const Matrix2& o) {
        a11 += o.a11;
        a12 += o.a12;
        a21 += o.a21;
        a22 += o.a22;
        return *this;
    }
    constexpr Matrix2& operator-=(const Matrix2& o) {
        a11 -= o.a11;
        a12 -= o.a12;
        a21 -= o.a21;
        a22 -= o.a22;
        return *this;
    }
    constexpr Matrix2& operator*=(double s) {
        a11 *= s;
        a12 *= s;
        a21 *= s;
        a22 *= s;
        return *this;
    }
    friend constexpr Matrix2 operator+(Matrix2 a, const Matrix2& b) { return a += b; }
    friend constexpr Matrix2 operator-(Matrix2 a, const Matrix2& b) { return a -= b; }
    friend constexpr Matrix2 operator*(double s, Matrix2 a) { return a *= s; }
    friend constexpr Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
        return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
                a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
    }
    friend constexpr bool operator==(const Matrix2&, const Matrix2&) = default;

    /// Eigenvalues from the trace/determinant formula, ordered by descending real part.
    std::array<std::complex<double>, 2> eigenvalues() const {
        const double half_tr = 0.5 * trace();
        const double disc = half_tr * half_tr - det();
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            return {std::complex<double>(half_tr + s, 0.0), std::complex<double>(half_tr - s, 0.0)};
        }
        const double s = std::sqrt(-disc);
        return {std::complex<double>(half_tr, s), std::complex<double>(half_tr, -s)};
    }

    /// Inverse; throws NumericalError when singular.
    Matrix2 inverse() const {
        const double dt = det();
        if (dt == 0.0 || !std::isfinite(dt)) {
            throw NumericalError("singular 2x2 block");
        }
        const double inv = 1.0 / dt;
        return {a22 * inv, -a12 * inv, -a21 * inv, a11 * inv};
    }
};

}  // namespace terrace
