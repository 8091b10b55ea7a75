// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "terrace/evolve.hpp"
#include "terrace/fronts.hpp"
#include "terrace/model.hpp"
#include "terrace/scenarios.hpp"
#include "terrace/spectral.hpp"
#include "terrace/speeds.hpp"
#include "terrace/weights.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace terrace;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= budget_s;
    const bool ok = o.pass && in_time;
    failures += !ok;
    std::printf("[%s] criterion %d: %s | %s | %.1f s (budget %.0f s%s)\n", ok ? "PASS" : "FAIL", id, title,
                o.detail.c_str(), secs, budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char b[128];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

ModelParams random_admissible(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(1.01, 10.0), r(1.01, 5.0), a(0.01, 1.5);
    while (true) {
        ModelParams p{d(rng), r(rng), a(rng), a(rng)};
        if (p.assumption_ok()) {
            return p;
        }
    }
}

Outcome equilibria_algebra() {
    std::mt19937_64 rng(20240601);
    double worst_eq = 0.0, worst_jac = 0.0;
    int class_ok = 0;
    for (int k = 0; k < 100; ++k) {
        const ModelParams p = random_admissible(rng);
        const auto e = equilibria(p);
        // coexistence state from r(1 - u1) + a1 u2 = 0, 1 - u2 + a2 u1 = 0
        Eigen::Matrix2d m;
        m << p.r, -p.alpha1, -p.alpha2, 1.0;
        const Eigen::Vector2d s = m.fullPivLu().solve(Eigen::Vector2d(p.r, 1.0));
        worst_eq = std::max({worst_eq, std::abs(e.e1.u1 - s(0)) / s(0), std::abs(e.e1.u2 - s(1)) / s(1)});
        // Jacobian entries r(1-2u1)+a1 u2, a1 u1 / a2 u2, 1-2u2+a2 u1 at all four states
        for (int i = 0; i < 4; ++i) {
            const StatePoint u = e[i];
            const Matrix2 j = jacobian(u, p);
            const Matrix2 ref{p.r * (1 - 2 * u.u1) + p.alpha1 * u.u2, p.alpha1 * u.u1, p.alpha2 * u.u2,
                              1 - 2 * u.u2 + p.alpha2 * u.u1};
            worst_jac = std::max({worst_jac, std::abs(j.a11 - ref.a11), std::abs(j.a12 - ref.a12),
                                  std::abs(j.a21 - ref.a21), std::abs(j.a22 - ref.a22)});
        }
        bool ok = classify_equilibrium(e.e1, p) == Stability::stable;
        for (int i = 1; i < 4; ++i) {
            ok = ok && classify_equilibrium(e[i], p) == Stability::unstable;
        }
        // trace/determinant test as the independent verdict
        for (int i = 0; i < 4; ++i) {
            const Matrix2 j = jacobian(e[i], p);
            ok = ok && ((j.trace() < 0 && j.det() > 0) == (i == 0));
        }
        class_ok += ok;
    }
    std::ostringstream os;
    os << "e1 rel err " << worst_eq << ", Jacobian err " << worst_jac << ", classification " << class_ok << "/100";
    return {worst_eq < 1e-12 && worst_jac < 1e-12 && class_ok == 100, os.str()};
}

Outcome kpp_front() {
    const FrontProfile f = kpp_profile(6.0, 4.0, 2.0, {100.0, 4001});
    const double res = interior_sup(kpp_residual(f, 4.0, 2.0));
    const double slow = (6.0 - std::sqrt(36.0 - 32.0)) / 8.0;  // slow root of 4k^2 - 6k + 2
    const double tail_err = std::abs(f.tail_rate - slow) / slow;
    std::vector<double> tr;
    for (std::size_t n : {2001u, 4001u, 8001u}) {
        const FrontProfile g = kpp_profile(6.0, 4.0, 2.0, {100.0, n});
        const auto t = profile_truncation_residual(g, {4.0, 2.0, 0.0, 0.0});
        std::vector<double> r(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            r[i] = t[i].u1;
        }
        tr.push_back(interior_sup(r));
    }
    const double o1 = std::log2(tr[0] / tr[1]), o2 = std::log2(tr[1] / tr[2]);
    std::ostringstream os;
    os << "residual " << res << ", tail " << f.tail_rate << " vs " << slow << ", truncation orders " << o1 << ", "
       << o2;
    return {res < 1e-6 && tail_err < 0.05 && std::abs(o1 - 2) < 0.1 && std::abs(o2 - 2) < 0.1, os.str()};
}

bool lattice_feasible(double c1, double c2, const ModelParams& p) {
    const double step = 5e-4;
    for (int i = 1; i <= 12000; ++i) {
        const double k1 = i * step;
        if (!(k1 * k1 - c1 * k1 + 1.0 + p.alpha2 < 0.0 && p.d * k1 * k1 - c1 * k1 - p.r < 0.0)) {
            continue;
        }
        for (int j = 1; j <= 12000; ++j) {
            const double k2 = j * step;
            const double b = p.d * k2 * k2 - c2 * k2 + p.r;
            if (b < 0.0 && b + k1 * (c2 - c1) < 0.0) {
                return true;
            }
        }
        return false;
    }
    return false;
}

Outcome speed_feasibility() {
    const ModelParams p{4.0, 2.0, 0.05, 0.05};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u1(2.0, 6.0), u2(4.0, 20.0);
    int agree = 0, feasible = 0;
    for (int k = 0; k < 100; ++k) {
        double c1 = u1(rng), c2 = u2(rng);
        if (c1 >= c2) {
            std::swap(c1, c2);
        }
        const bool a = certificate(c1, c2, p).feasible();
        agree += a == lattice_feasible(c1, c2, p);
        feasible += a;
    }
    const SpeedCertificate bad = certificate(3.0, 6.0, p);
    const SpeedCertificate good = certificate(3.0, 13.2, p, 0.7929);
    const double hand = 4 * 1.65 * 1.65 - 13.2 * 1.65 + 2 + 0.7929 * (13.2 - 3.0);
    const bool verdicts = !bad.feasible() && bad.failed == SpeedFailure::ineq_1c && good.feasible() &&
                          std::abs(good.kappa2 - 1.65) < 1e-3 && std::abs(good.margin_1c - hand) < 1e-3 &&
                          std::round(good.margin_1c * 100.0) == -80.0;
    std::ostringstream os;
    os << "agreement " << agree << "/100 (" << feasible << " feasible), (3,6) fails at "
       << to_string(bad.failed) << ", (3,13.2) kappa2 " << good.kappa2 << " margin " << good.margin_1c;
    return {agree == 100 && verdicts, os.str()};
}

Outcome weight_bound() {
    const TimeSpaceGrid g{0.0, 20.0, 0.05, -60.0, 320.0, 0.05};
    const WeightedCase ok = compliant_case();
    const DiagBoundReport a = diag_bound_check(*ok.spec, ok.weight, ok.params, g);
    const WeightedCase bad = forced_case();
    const DiagBoundReport b = diag_bound_check(*bad.spec, bad.weight, bad.params, g);
    const auto& w = bad.weight;
    const double closed = bad.params.r + w.kappa1 * (w.c2 - w.c1) - w.kappa2 * w.c2 + bad.params.d * w.kappa2 * w.kappa2;
    std::ostringstream os;
    os << "compliant eta " << a.eta << "; forced eta " << b.eta << " in " << to_string(b.region) << ", value "
       << -b.eta << " (closed form " << closed << ")";
    return {a.eta > 0.0 && b.eta < 0.0 && b.region == Region::I5 && std::abs(-b.eta - 2.13) <= 0.1 &&
                std::abs(-b.eta - closed) < 1e-6,
            os.str()};
}

Outcome numerical_range() {
    // oracles
    Eigen::MatrixXd herm(3, 3);
    herm << 2, 1, 0, 1, -1, 0.5, 0, 0.5, 0.3;
    const auto hp = field_of_values(BandMatrix::from_dense(herm), 32);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(herm).eigenvalues();
    double herm_err = 0.0, hi = -1e300, lo = 1e300;
    for (const auto& p : hp) {
        herm_err = std::max(herm_err, std::abs(p.z.imag()));
        hi = std::max(hi, p.z.real());
        lo = std::min(lo, p.z.real());
    }
    herm_err = std::max({herm_err, std::abs(hi - ev.maxCoeff()), std::abs(lo - ev.minCoeff())});
    Eigen::MatrixXd nil = Eigen::MatrixXd::Zero(2, 2);
    nil(0, 1) = 1.0;
    double nil_err = 0.0;
    for (const auto& p : field_of_values(BandMatrix::from_dense(nil), 64)) {
        nil_err = std::max(nil_err, std::abs(std::abs(p.z) - 0.5));
    }
    Eigen::MatrixXd nrm = Eigen::MatrixXd::Zero(4, 4);
    nrm << -1, -2, 0, 0, 2, -1, 0, 0, 0, 0, 0.5, 0, 0, 0, 0, -3;
    const std::vector<cplx> eig{{-1, 2}, {-1, -2}, {0.5, 0}, {-3, 0}};
    double nrm_err = 0.0;
    for (const auto& p : field_of_values(BandMatrix::from_dense(nrm), 64)) {
        double s = -1e300;
        for (const auto& z : eig) {
            s = std::max(s, (std::polar(1.0, p.theta) * z).real());
        }
        nrm_err = std::max(nrm_err, std::abs(p.support - s));
    }
    const bool oracles = herm_err < 1e-9 && nil_err < 1e-6 && nrm_err < 1e-9;

    const WeightedCase wc = compliant_case();
    const OperatorDomain dom{-100.0, 400.0, 2000};
    bool ok = oracles;
    std::ostringstream os;
    os << "oracles " << (oracles ? "ok" : "FAILED") << " (herm " << herm_err << ", nilpotent " << nil_err
       << ", normal " << nrm_err << ")";
    for (double t : {0.0, 5.0, 10.0}) {
        const DiscreteOperator op = build_operator(t, *wc.spec, wc.weight, wc.params, dom);
        const auto pts = field_of_values(op.matrix, 64);
        const double mr = max_real(pts);
        const double eta = sector_eta(points_of(pts));
        double ratio = 0.0;
        if (eta > 0.0) {
            const SectorSpec s{eta};
            const auto lam = samples_outside_sector(s, {0.05, 0.5, 2.0, 10.0, 50.0}, {-60.0, -25.0, 25.0, 60.0});
            ratio = resolvent_check(op.matrix, s, lam).min_ratio;
            ok = ok && lam.size() == 20 && ratio >= 0.99;
        }
        ok = ok && mr < 0.0 && eta > 0.0;
        os << "; t=" << t << ": maxRe " << mr << ", eta " << eta << ", min ratio " << ratio;
    }
    return {ok, os.str()};
}

Outcome weighted_decay() {
    const WeightedCase wc = compliant_case();
    bool ok = true;
    std::ostringstream os;
    for (const auto& b : bump_presets(*wc.spec)) {
        ScenarioConfig c = weighted_scenario(wc, b.center, {-100.0, 650.0, 7501}, 40.0, 0.01);
        c.snapshot_stride = c.steps();
        const SpaceTimeField f = simulate(c);
        const DecayFit fit = decay_fit(f.trace_t, f.norms, 5.0, 40.0);
        const double sup = *std::max_element(f.norms.begin(), f.norms.end()) / f.norms.front();
        const ConsistencyReport cr = weighted_consistency(wc, b.center, 5.0, -30.0, 90.0, 0.05);
        ok = ok && fit.eta > 0.0 && fit.r2 > 0.98 && std::isfinite(sup) && cr.relative < 1e-4;
        os << (os.tellp() > 0 ? "; " : "") << b.name << " (x=" << fmt("%.2f", b.center) << "): eta_fit " << fit.eta
           << ", r2 " << fit.r2 << ", sup ratio " << sup << ", consistency " << cr.relative;
    }
    return {ok, os.str()};
}

Outcome figure_one() {
    const FigurePreset fp = figure_preset("fig1");
    const SpaceTimeField f = simulate(fp.config);
    const InterfaceSummary s = summarize_interfaces(f, fp.fit_t0, fp.fit_t1);
    const double kpp = 2.0 * std::sqrt(fp.config.params.d * fp.config.params.r);
    const double lead = std::max(s.speed_u1, s.speed_u2), trail = std::min(s.speed_u1, s.speed_u2);
    std::ostringstream os;
    os << "interfaces " << s.count_start << "->" << s.count_end << ", leading " << lead << " vs " << kpp
       << ", trailing " << trail << ", gap " << lead - trail;
    return {s.count_end == 2 && std::abs(lead / kpp - 1.0) < 0.10 && lead - trail > 0.5, os.str()};
}

Outcome figure_two() {
    const FigurePreset l = figure_preset("fig2-left"), r = figure_preset("fig2-right");
    const InterfaceSummary a = summarize_interfaces(simulate(l.config), l.fit_t0, l.fit_t1);
    const InterfaceSummary b = summarize_interfaces(simulate(r.config), r.fit_t0, r.fit_t1);
    std::ostringstream os;
    os << "left: " << a.count_start << "->" << a.count_end << ", separation " << a.sep_start << "->" << a.sep_end
       << (a.sep_increasing ? " increasing" : " not increasing") << "; right: " << b.count_start << "->"
       << b.count_end << ", separation " << b.sep_start << "->" << b.sep_end
       << (b.sep_nonincreasing ? " non-increasing" : " not monotone");
    const bool left = a.count_start == 1 && a.count_end == 2 && a.sep_increasing;
    const bool right = b.sep_nonincreasing && b.count_end == 1;
    return {left && right, os.str()};
}

Outcome two_by_two_lemma() {
    std::mt19937_64 rng(3141);
    std::uniform_real_distribution<double> neg(-5.0, -0.05), off(-4.0, 4.0), ang(0.0, 2.0 * std::numbers::pi);
    int tested = 0, violations = 0;
    double tightest = 1e300;
    while (tested < 1000) {
        const Matrix2 a{neg(rng), off(rng), off(rng), neg(rng)};
        const Nr2x2Result r = nr_2x2_margin(a);
        if (!r.holds) {
            continue;
        }
        ++tested;
        double emp = 1e300;
        for (int k = 0; k < 10000; ++k) {
            // unit vector in C^2
            const double th = ang(rng), p1 = ang(rng), p2 = ang(rng);
            const cplx z1 = std::polar(std::cos(th), p1), z2 = std::polar(std::sin(th), p2);
            const cplx az1 = a.a11 * z1 + a.a12 * z2, az2 = a.a21 * z1 + a.a22 * z2;
            emp = std::min(emp, -(az1 * std::conj(z1) + az2 * std::conj(z2)).real());
        }
        violations += emp < r.margin - 1e-12;
        tightest = std::min(tightest, emp - r.margin);
    }
    std::ostringstream os;
    os << tested << " matrices, " << violations << " violations, smallest slack " << tightest;
    return {violations == 0, os.str()};
}

}  // namespace

int main() {
    criterion(1, "equilibria and Jacobian algebra", 1, equilibria_algebra);
    criterion(2, "KPP front (d,r,c)=(4,2,6)", 10, kpp_front);
    criterion(3, "speed feasibility", 30, speed_feasibility);
    criterion(4, "weight diagonal bound", 120, weight_bound);
    criterion(5, "numerical range and resolvent", 300, numerical_range);
    criterion(6, "weighted decay at desk scale", 300, weighted_decay);
    criterion(7, "figure 1 interfaces", 300, figure_one);
    criterion(8, "figure 2 breakup and collapse", 300, figure_two);
    criterion(9, "2x2 numerical-range lemma", 60, two_by_two_lemma);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
