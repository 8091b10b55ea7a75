#pragma once

#include "terrace/types.hpp"

#include <complex>
#ifndef lapack_complex_double
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace terrace {

/// Tridiagonal system: lower[i] multiplies x[i-1], upper[i] multiplies x[i+1].
/// lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }
};

/// Thomas algorithm, in place on rhs. No pivoting; callers supply diagonally dominant systems.
/// scratch must hold size() entries.
inline void solve_tridiagonal(const Tridiagonal& m, std::span<double> rhs, std::span<double> scratch) {
    const std::size_t n = m.size();
    if (n == 0) {
        return;
    }
    double piv = m.diag[0];
    if (piv == 0.0) {
        throw NumericalError("tridiagonal solve: zero pivot at row 0");
    }
    scratch[0] = m.upper[0] / piv;
    rhs[0] /= piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = m.diag[i] - m.lower[i] * scratch[i - 1];
        if (piv == 0.0) {
            throw NumericalError("tridiagonal solve: zero pivot at row " + std::to_string(i));
        }
        scratch[i] = m.upper[i] / piv;
        rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / piv;
    }
    for (std::size_t i = n - 1; i > 0; --i) {
        rhs[i - 1] -= scratch[i - 1] * rhs[i];
    }
}

inline void solve_tridiagonal(const Tridiagonal& m, std::span<double> rhs) {
    std::vector<double> scratch(m.size());
    solve_tridiagonal(m, rhs, scratch);
}

/// Block tridiagonal system with 2x2 blocks (two interleaved components per grid node).
struct BlockTridiagonal {
    std::vector<Matrix2> lower;
    std::vector<Matrix2> diag;
    std::vector<Matrix2> upper;

    explicit BlockTridiagonal(std::size_t n = 0) : lower(n), diag(n), upper(n) {}
    std::size_t size() const { return diag.size(); }
};

/// Block Thomas elimination, in place on rhs.
inline void solve_block_tridiagonal(const BlockTridiagonal& m, std::span<StatePoint> rhs) {
    const std::size_t n = m.size();
    if (n == 0) {
        return;
    }
    std::vector<Matrix2> c_prime(n);
    Matrix2 inv = m.diag[0].inverse();
    c_prime[0] = inv * m.upper[0];
    rhs[0] = inv * rhs[0];
    for (std::size_t i = 1; i < n; ++i) {
        inv = (m.diag[i] - m.lower[i] * c_prime[i - 1]).inverse();
        c_prime[i] = inv * m.upper[i];
        rhs[i] = inv * (rhs[i] - m.lower[i] * rhs[i - 1]);
    }
    for (std::size_t i = n - 1; i > 0; --i) {
        rhs[i - 1] -= c_prime[i - 1] * rhs[i];
    }
}

/// General banded system assembled from (row, col, value) entries; the bandwidths are taken
/// from the entries. Solved by LU with partial pivoting (LAPACK dgbsv).
class BandedSystem {
public:
    explicit BandedSystem(std::size_t n) : n_(n) {}

    void add(std::size_t row, std::size_t col, double v) {
        if (v != 0.0) {
            entries_.emplace_back(row, col, v);
        }
    }

    std::size_t size() const { return n_; }

    /// Overwrites rhs with the solution.
    void solve(std::span<double> rhs) const {
        lapack_int kl = 0, ku = 0;
        for (const auto& [r, c, v] : entries_) {
            if (r > c) {
                kl = std::max(kl, static_cast<lapack_int>(r - c));
            } else {
                ku = std::max(ku, static_cast<lapack_int>(c - r));
            }
        }
        const lapack_int n = static_cast<lapack_int>(n_);
        const lapack_int ldab = 2 * kl + ku + 1;
        std::vector<double> ab(static_cast<std::size_t>(ldab) * n_, 0.0);
        for (const auto& [r, c, v] : entries_) {
            ab[c * static_cast<std::size_t>(ldab) + static_cast<std::size_t>(kl + ku) + r - c] += v;
        }
        std::vector<lapack_int> ipiv(n_);
        const lapack_int info =
            LAPACKE_dgbsv(LAPACK_COL_MAJOR, n, kl, ku, 1, ab.data(), ldab, ipiv.data(), rhs.data(), n);
        if (info != 0) {
            throw NumericalError("banded solve failed (dgbsv info " + std::to_string(info) + ")");
        }
    }

private:
    std::size_t n_;
    std::vector<std::tuple<std::size_t, std::size_t, double>> entries_;
};

}  // namespace terrace
