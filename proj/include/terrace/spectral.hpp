#pragma once

#include "terrace/banded.hpp"
#include "terrace/fronts.hpp"
#include "terrace/io.hpp"
#include "terrace/model.hpp"
#include "terrace/weights.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace terrace {

using cplx = std::complex<double>;

/// Real general band matrix in LAPACK column-major band layout (ld = kl + ku + 1).
class BandMatrix {
public:
    BandMatrix() = default;
    BandMatrix(std::size_t n, std::size_t kl, std::size_t ku)
        : n_(n), kl_(kl), ku_(ku), data_((kl + ku + 1) * n, 0.0) {}

    std::size_t size() const { return n_; }
    std::size_t kl() const { return kl_; }
    std::size_t ku() const { return ku_; }

    bool in_band(std::size_t i, std::size_t j) const {
        return i < n_ && j < n_ && i <= j + kl_ && j <= i + ku_;
    }

    double operator()(std::size_t i, std::size_t j) const {
        return in_band(i, j) ? data_[index(i, j)] : 0.0;
    }

    void add(std::size_t i, std::size_t j, double v) {
        if (!in_band(i, j)) {
            throw ValidationError("BandMatrix: entry outside the band");
        }
        data_[index(i, j)] += v;
    }

    template <class T>
    std::vector<T> apply(const std::vector<T>& x) const {
        std::vector<T> y(n_, T{});
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t i0 = j > ku_ ? j - ku_ : 0;
            const std::size_t i1 = std::min(n_ - 1, j + kl_);
            for (std::size_t i = i0; i <= i1; ++i) {
                y[i] += data_[index(i, j)] * x[j];
            }
        }
        return y;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            for (std::size_t i = (j > ku_ ? j - ku_ : 0); i <= std::min(n_ - 1, j + kl_); ++i) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data_[index(i, j)];
            }
        }
        return m;
    }

    static BandMatrix from_dense(const Eigen::MatrixXd& m) {
        if (m.rows() != m.cols() || m.rows() == 0) {
            throw ValidationError("BandMatrix: dense input must be square and non-empty");
        }
        const auto n = static_cast<std::size_t>(m.rows());
        BandMatrix b(n, n - 1, n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                b.add(i, j, m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
        }
        return b;
    }

private:
    std::size_t index(std::size_t i, std::size_t j) const { return j * (kl_ + ku_ + 1) + ku_ + i - j; }

    std::size_t n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Weighted linearized operator on a truncated domain with homogeneous Dirichlet ends.

/// `nodes` interior points x_i = x_lo + (i+1) h, h = (x_hi - x_lo)/(nodes+1).
struct OperatorDomain {
    double x_lo = -100.0;
    double x_hi = 400.0;
    std::size_t nodes = 2000;

    double step() const { return (x_hi - x_lo) / static_cast<double>(nodes + 1); }
    double x(std::size_t i) const { return x_lo + step() * static_cast<double>(i + 1); }
    void validate() const {
        if (!(x_hi > x_lo) || nodes < 2) {
            throw ValidationError("operator domain needs x_hi > x_lo and at least 2 nodes");
        }
    }
};

struct DiscreteOperator {
    double t = 0.0;
    OperatorDomain domain;
    BandMatrix matrix;  // 2N x 2N, node-interleaved (u1, u2)
};

/// Coefficients at one point: the state the operator linearizes about and the weight jet.
struct OperatorCoefficients {
    StatePoint ubar;
    PhiJet weight;
};

/// D w_xx + 2 D phi_x w_x + (J_g(ubar) - phi_t + D (phi_xx + phi_x^2)) w, central differences.
inline DiscreteOperator assemble_operator(double t, const OperatorDomain& dom, const ModelParams& p,
                                          const std::function<OperatorCoefficients(double)>& coef) {
    dom.validate();
    const std::size_t n = dom.nodes;
    const double h = dom.step();
    const double invh2 = 1.0 / (h * h);
    const double inv2h = 1.0 / (2.0 * h);
    const std::array<double, 2> dif{p.d, 1.0};
    DiscreteOperator op{t, dom, BandMatrix(2 * n, 2, 2)};
    BandMatrix& m = op.matrix;
    for (std::size_t i = 0; i < n; ++i) {
        const OperatorCoefficients c = coef(dom.x(i));
        const Matrix2 j = jacobian(c.ubar, p);
        const PhiJet& f = c.weight;
        const std::array<std::array<double, 2>, 2> a{{{j.a11, j.a12}, {j.a21, j.a22}}};
        for (std::size_t k = 0; k < 2; ++k) {
            const std::size_t row = 2 * i + k;
            const double adv = 2.0 * dif[k] * f.x * inv2h;
            if (i > 0) {
                m.add(row, row - 2, dif[k] * invh2 - adv);
            }
            if (i + 1 < n) {
                m.add(row, row + 2, dif[k] * invh2 + adv);
            }
            m.add(row, row, -2.0 * dif[k] * invh2 - f.t + dif[k] * (f.xx + f.x * f.x));
            for (std::size_t l = 0; l < 2; ++l) {
                m.add(row, 2 * i + l, a[k][l]);
            }
        }
    }
    return op;
}

inline constexpr double kEdgeTol = 1e-6;

/// Operator of the weighted dynamics at time t around the superposition.
inline DiscreteOperator build_operator(double t, const SuperpositionSpec& s, const WeightSpec& w,
                                       const ModelParams& p, const OperatorDomain& dom) {
    check_consistent(s, w);
    dom.validate();
    const EquilibriumSet eq = equilibria(p);
    auto near_equilibrium = [&](double x) {
        const StatePoint u = superpose(s, t, x);
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 4; ++k) {
            best = std::min(best, max_abs(u - eq[k]));
        }
        return best;
    };
    const double left = near_equilibrium(dom.x_lo), right = near_equilibrium(dom.x_hi);
    if (!(left <= kEdgeTol && right <= kEdgeTol)) {
        std::ostringstream os;
        os << "build_operator: domain [" << dom.x_lo << ", " << dom.x_hi << "] too narrow at t=" << t
           << " (distance to nearest equilibrium: left " << left << ", right " << right << ")";
        throw ValidationError(os.str());
    }
    return assemble_operator(t, dom, p, [&](double x) {
        return OperatorCoefficients{superpose(s, t, x), phi(t, x, w)};
    });
}

// ---------------------------------------------------------------------------
// Field of values by the rotation method.

struct FovPoint {
    double theta = 0.0;
    cplx z;                // Rayleigh quotient <M u, u> of the extreme eigenvector
    double support = 0.0;  // lambda_max of the Hermitian part of e^{i theta} M
};

namespace spectral_detail {

/// Hermitian band matrix in LAPACK upper storage, kd superdiagonals.
struct HermitianBand {
    std::size_t n = 0, kd = 0;
    std::vector<cplx> ab;  // ld = kd + 1

    HermitianBand(std::size_t n_, std::size_t kd_) : n(n_), kd(kd_), ab((kd_ + 1) * n_) {}
    cplx& upper(std::size_t i, std::size_t j) { return ab[j * (kd + 1) + kd + i - j]; }  // i <= j
    cplx get(std::size_t i, std::size_t j) const {
        if (i > j) {
            return std::conj(get(j, i));
        }
        if (j - i > kd) {
            return {};
        }
        return ab[j * (kd + 1) + kd + i - j];
    }
};

/// Single eigenvalue by index (1 = smallest, n = largest): band reduction plus bisection.
inline double eigenvalue(const HermitianBand& h, std::size_t index) {
    HermitianBand work = h;
    const auto n = static_cast<lapack_int>(h.n);
    const auto k = static_cast<lapack_int>(index);
    lapack_int found = 0;
    std::vector<double> w(h.n);
    std::vector<cplx> q(1), z(1);
    std::vector<lapack_int> ifail(h.n);
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    const lapack_int info = LAPACKE_zhbevx(LAPACK_COL_MAJOR, 'N', 'I', 'U', n, static_cast<lapack_int>(h.kd),
                                           work.ab.data(), static_cast<lapack_int>(h.kd + 1), q.data(), 1, 0.0,
                                           0.0, k, k, abstol, &found, w.data(), z.data(), 1, ifail.data());
    if (info != 0 || found != 1) {
        throw NumericalError("zhbevx failed (info " + std::to_string(info) + ")");
    }
    return w[0];
}

/// Gershgorin bound on the spectral radius.
inline double gershgorin(const HermitianBand& h) {
    double m = 0.0;
    for (std::size_t i = 0; i < h.n; ++i) {
        double row = 0.0;
        for (std::size_t j = (i > h.kd ? i - h.kd : 0); j <= std::min(h.n - 1, i + h.kd); ++j) {
            row += std::abs(h.get(i, j));
        }
        m = std::max(m, row);
    }
    return m;
}

inline HermitianBand hermitian_part(const BandMatrix& m, double theta) {
    const std::size_t kd = std::max(m.kl(), m.ku());
    HermitianBand h(m.size(), kd);
    const cplx e = std::polar(1.0, theta);
    for (std::size_t j = 0; j < m.size(); ++j) {
        for (std::size_t i = (j > kd ? j - kd : 0); i <= j; ++i) {
            h.upper(i, j) = 0.5 * (e * m(i, j) + std::conj(e) * m(j, i));
        }
    }
    return h;
}

inline std::vector<cplx> multiply(const HermitianBand& h, const std::vector<cplx>& x) {
    std::vector<cplx> y(h.n);
    for (std::size_t i = 0; i < h.n; ++i) {
        const std::size_t j0 = i > h.kd ? i - h.kd : 0;
        const std::size_t j1 = std::min(h.n - 1, i + h.kd);
        for (std::size_t j = j0; j <= j1; ++j) {
            y[i] += h.get(i, j) * x[j];
        }
    }
    return y;
}

inline double norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (const auto& z : v) {
        s += std::norm(z);
    }
    return std::sqrt(s);
}

/// Eigenvector of h for the eigenvalue lambda by shifted inverse iteration.
inline std::vector<cplx> eigenvector(const HermitianBand& h, double lambda, double scale) {
    const std::size_t n = h.n, kd = h.kd;
    const std::size_t ld = 3 * kd + 1;
    const auto nn = static_cast<lapack_int>(n), kk = static_cast<lapack_int>(kd);
    std::vector<cplx> ab(ld * n);
    std::vector<lapack_int> ipiv(n);
    lapack_int info = 1;
    for (double rel = 1e-10; info > 0 && rel < 1e-3; rel *= 100.0) {
        const double shift = lambda + rel * scale;
        std::fill(ab.begin(), ab.end(), cplx{});
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i0 = j > kd ? j - kd : 0;
            const std::size_t i1 = std::min(n - 1, j + kd);
            for (std::size_t i = i0; i <= i1; ++i) {
                ab[j * ld + 2 * kd + i - j] = h.get(i, j) - (i == j ? shift : 0.0);
            }
        }
        info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, nn, nn, kk, kk, ab.data(), static_cast<lapack_int>(ld),
                              ipiv.data());
    }
    if (info != 0) {
        throw NumericalError("zgbtrf failed (info " + std::to_string(info) + ")");
    }
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        // fixed start vector without symmetry
        const double x = static_cast<double>(i);
        v[i] = cplx(1.0 + 0.37 * std::sin(1.3 * x), 0.21 * std::cos(0.7 * x));
    }
    for (int it = 0; it < 8; ++it) {
        const double nv = norm(v);
        for (auto& z : v) {
            z /= nv;
        }
        const std::vector<cplx> hv = multiply(h, v);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res += std::norm(hv[i] - lambda * v[i]);
        }
        if (std::sqrt(res) <= 1e-9 * scale) {
            break;
        }
        info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', nn, kk, kk, 1, ab.data(), static_cast<lapack_int>(ld),
                              ipiv.data(), v.data(), nn);
        if (info != 0) {
            throw NumericalError("zgbtrs failed (info " + std::to_string(info) + ")");
        }
    }
    const double nv = norm(v);
    for (auto& z : v) {
        z /= nv;
    }
    return v;
}

}  // namespace spectral_detail

/// Boundary points of the numerical range: for each of n_angles rotations theta, the
/// Rayleigh quotient of a top eigenvector of (e^{i theta} M + e^{-i theta} M^T)/2.
/// The polygon through the points is an inner approximation.
inline std::vector<FovPoint> field_of_values(const BandMatrix& m, int n_angles) {
    if (n_angles < 8) {
        throw ValidationError("field_of_values: need at least 8 angles");
    }
    if (m.size() == 0) {
        throw ValidationError("field_of_values: empty matrix");
    }
    std::vector<FovPoint> out;
    out.reserve(static_cast<std::size_t>(n_angles));
    for (int k = 0; k < n_angles; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / n_angles;
        try {
            const auto h = spectral_detail::hermitian_part(m, theta);
            const double lmax = spectral_detail::eigenvalue(h, h.n);
            const double scale = std::max(1.0, spectral_detail::gershgorin(h));
            const std::vector<cplx> u = spectral_detail::eigenvector(h, lmax, scale);
            const std::vector<cplx> mu = m.apply(u);
            cplx z{};
            for (std::size_t i = 0; i < u.size(); ++i) {
                z += mu[i] * std::conj(u[i]);
            }
            out.push_back({theta, z, lmax});
        } catch (const NumericalError& e) {
            std::ostringstream os;
            os << "field_of_values: eigensolver failure at theta=" << theta << ": " << e.what();
            throw NumericalError(os.str());
        }
    }
    return out;
}

inline double max_real(const std::vector<FovPoint>& pts) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        m = std::max(m, p.z.real());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Sector S = {Re l <= -eta (1 + |Im l|)}.

struct SectorSpec {
    double eta = 0.0;

    bool contains(cplx l) const { return margin(l) <= 0.0; }
    double margin(cplx l) const { return l.real() + eta * (1.0 + std::abs(l.imag())); }

    /// Euclidean distance to the sector: projection onto the nearer boundary ray or the apex.
    double distance(cplx l) const {
        const double x = l.real(), y = std::abs(l.imag());
        if (contains(l)) {
            return 0.0;
        }
        const double s = std::sqrt(1.0 + eta * eta);
        const double foot_y = y - eta * (x + eta * y + eta) / (1.0 + eta * eta);
        if (foot_y >= 0.0) {
            return (x + eta * y + eta) / s;
        }
        return std::hypot(x + eta, y);
    }
};

struct SectorVerdict {
    bool ok = false;
    double worst_margin = -std::numeric_limits<double>::infinity();
};

inline SectorVerdict sector_check(const std::vector<cplx>& points, const SectorSpec& s) {
    SectorVerdict v{true, -std::numeric_limits<double>::infinity()};
    for (const auto& z : points) {
        v.worst_margin = std::max(v.worst_margin, s.margin(z));
    }
    v.ok = v.worst_margin <= 0.0;
    return v;
}

inline std::vector<cplx> points_of(const std::vector<FovPoint>& pts) {
    std::vector<cplx> z;
    z.reserve(pts.size());
    for (const auto& p : pts) {
        z.push_back(p.z);
    }
    return z;
}

/// Largest eta in (0, hi] with every point inside the sector, by bisection to `tol`.
/// Returns 0 when no positive eta works.
inline double sector_eta(const std::vector<cplx>& points, double hi = 10.0, double tol = 1e-10) {
    auto ok = [&](double eta) { return sector_check(points, {eta}).ok; };
    if (ok(hi)) {
        return hi;
    }
    double lo = 0.0;
    if (!ok(tol)) {
        return 0.0;
    }
    lo = tol;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

// ---------------------------------------------------------------------------
// Resolvent bound sigma_min(l I - M) >= dist(l, S).

/// Smallest singular value of l I - M from the smallest eigenvalue of the banded
/// Hermitian matrix (l I - M)^H (l I - M).
inline double sigma_min_shifted(const BandMatrix& m, cplx l) {
    const std::size_t n = m.size();
    const std::size_t kl = m.kl(), ku = m.ku();
    const std::size_t kd = std::min(n - 1, kl + ku);
    spectral_detail::HermitianBand c(n, kd);
    auto b = [&](std::size_t r, std::size_t col) -> cplx {
        cplx v = -m(r, col);
        if (r == col) {
            v += l;
        }
        return v;
    };
    // C_ij = sum_r conj(B_ri) B_rj over rows r touching both columns
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t c0 = r > kl ? r - kl : 0;
        const std::size_t c1 = std::min(n - 1, r + ku);
        for (std::size_t j = c0; j <= c1; ++j) {
            const cplx brj = b(r, j);
            for (std::size_t i = c0; i <= j; ++i) {
                c.upper(i, j) += std::conj(b(r, i)) * brj;
            }
        }
    }
    return std::sqrt(std::max(0.0, spectral_detail::eigenvalue(c, 1)));
}

struct ResolventSample {
    cplx lambda;
    double sigma_min = 0.0;
    double dist = 0.0;
    double ratio = 0.0;
};

struct ResolventReport {
    std::vector<ResolventSample> samples;
    double min_ratio = std::numeric_limits<double>::infinity();
    bool ok = true;  // sigma_min >= dist - tol everywhere
};

inline ResolventReport resolvent_check(const BandMatrix& m, const SectorSpec& s, const std::vector<cplx>& lambdas,
                                       double tol = 1e-8) {
    ResolventReport rep;
    for (const auto& l : lambdas) {
        ResolventSample r;
        r.lambda = l;
        r.dist = s.distance(l);
        if (!(r.dist > 0.0)) {
            std::ostringstream os;
            os << "resolvent_check: sample " << l << " lies inside the sector";
            throw ValidationError(os.str());
        }
        r.sigma_min = sigma_min_shifted(m, l);
        r.ratio = r.sigma_min / r.dist;
        rep.min_ratio = std::min(rep.min_ratio, r.ratio);
        rep.ok = rep.ok && r.sigma_min >= r.dist - tol;
        rep.samples.push_back(r);
    }
    return rep;
}

/// Deterministic samples outside S: rays from the apex -eta at the given radii and angles
/// |arg| <= 60 degrees (the cone's opening faces left, so these rays point away from it).
inline std::vector<cplx> samples_outside_sector(const SectorSpec& s, const std::vector<double>& radii,
                                                const std::vector<double>& angles_deg) {
    std::vector<cplx> out;
    for (double r : radii) {
        for (double a : angles_deg) {
            const cplx l = cplx(-s.eta, 0.0) + std::polar(r, a * std::numbers::pi / 180.0);
            if (s.distance(l) > 0.0) {
                out.push_back(l);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// 2x2 numerical-range lemma.

struct Nr2x2Result {
    bool holds = false;  // hypothesis |b + c|/2 < sqrt(ad) satisfied
    double margin = 0.0;  // guaranteed lower bound of -Re<AZ,Z> for unit Z
    std::string reason;
};

/// For A = [[a, b], [c, d]] with a, d < 0: if |b + c|/2 < sqrt(ad) then
/// -Re<AZ, Z> >= (sqrt(ad) - |b + c|/2) min(e, 1/e) |Z|^2 with e = sqrt(a/d).
inline Nr2x2Result nr_2x2_margin(const Matrix2& m) {
    const double a = m.a11, d = m.a22;
    if (!(a < 0.0 && d < 0.0)) {
        throw ValidationError("nr_2x2_margin: diagonal entries must be negative");
    }
    const double g = std::sqrt(a * d);
    const double half = 0.5 * std::abs(m.a12 + m.a21);
    Nr2x2Result r;
    if (!(half < g)) {
        std::ostringstream os;
        os << "hypothesis fails: |b+c|/2 = " << half << " >= sqrt(ad) = " << g;
        r.reason = os.str();
        return r;
    }
    const double e = std::sqrt(a / d);
    r.holds = true;
    r.margin = (g - half) * std::min(e, 1.0 / e);
    return r;
}

/// min over unit Z of -Re<AZ, Z>, i.e. minus the top eigenvalue of the symmetric part.
inline double nr_2x2_exact(const Matrix2& m) {
    const double a = m.a11, d = m.a22, s = 0.5 * (m.a12 + m.a21);
    const double top = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + s * s);
    return -top;
}

// ---------------------------------------------------------------------------

inline void write_fov_csv(std::ostream& os, const std::vector<FovPoint>& pts) {
    CsvWriter w(os, {"theta", "re", "im"});
    for (const auto& p : pts) {
        w.cell(p.theta).cell(p.z.real()).cell(p.z.imag()).end_row();
    }
}

inline void write_resolvent_csv(std::ostream& os, const ResolventReport& r) {
    CsvWriter w(os, {"lambda_re", "lambda_im", "sigma_min", "dist", "ratio"});
    for (const auto& s : r.samples) {
        w.cell(s.lambda.real()).cell(s.lambda.imag()).cell(s.sigma_min).cell(s.dist).cell(s.ratio).end_row();
    }
}

}  // namespace terrace
