#pragma once

// Command dispatch: runs one configured command, writes artifacts and a manifest.

#include "terrace/config.hpp"
#include "terrace/evolve.hpp"
#include "terrace/fronts.hpp"
#include "terrace/io.hpp"
#include "terrace/model.hpp"
#include "terrace/scenarios.hpp"
#include "terrace/spectral.hpp"
#include "terrace/speeds.hpp"
#include "terrace/weights.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace terrace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum ExitCode { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

inline std::string sha256_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw Error("cannot read " + path.string());
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha256: digest init failed");
    }
    std::vector<char> buf(1 << 16);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (is.gcount() > 0) {
            EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(is.gcount()));
        }
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return os.str();
}

struct RunResult {
    int status = kExitOk;
    std::string error;
    std::vector<std::string> files;  // relative to the output directory, sorted
};

namespace cli_detail {

/// Owns the output directory for one run; every file goes through here.
class Output {
public:
    explicit Output(fs::path dir) : dir_(std::move(dir)) {}

    std::ofstream open(const std::string& name) {
        files_.push_back(name);
        return open_output((dir_ / name).string());
    }

    void image(const std::string& name, std::span<const double> field, std::size_t width, std::size_t height) {
        files_.push_back(name);
        write_pgm((dir_ / name).string(), to_gray(field, width, height));
    }

    void write_json(const std::string& name, const json& j) {
        auto os = open(name);
        os << j.dump(2) << '\n';
    }

    const fs::path& dir() const { return dir_; }
    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json params_json(const ModelParams& p) {
    return {{"d", p.d}, {"r", p.r}, {"alpha1", p.alpha1}, {"alpha2", p.alpha2}};
}

inline json cert_json(const SpeedCertificate& c) {
    return {{"c1", c.c1},
            {"c2", c.c2},
            {"feasible", c.feasible()},
            {"failed", to_string(c.failed)},
            {"fail_margin", num(c.fail_margin)},
            {"kappa1", num(c.kappa1)},
            {"kappa2", num(c.kappa2)},
            {"margin_1a", num(c.margin_1a())},
            {"margin_1b", num(c.margin_1b)},
            {"margin_1c", num(c.margin_1c)}};
}

inline std::string time_tag(double t) {
    std::ostringstream os;
    os << t;
    std::string s = os.str();
    std::replace(s.begin(), s.end(), '.', 'p');
    std::replace(s.begin(), s.end(), '-', 'm');
    return s;
}

inline WeightedCase weighted_case(const RunConfig& cfg) {
    const WeightBlock& w = cfg.weight;
    return make_weighted_case(cfg.params, w.c1, w.c2, w.kappa1, w.kappa2, w.psi1, w.psi2, w.profile1, w.profile2);
}

inline json run_equilibria(const RunConfig& cfg, Output& out) {
    const EquilibriumSet eq = equilibria(cfg.params);
    auto os = out.open("equilibria.csv");
    CsvWriter w(os, {"name", "u1", "u2", "stability", "eig1_re", "eig1_im", "eig2_re", "eig2_im"});
    json list = json::array();
    for (int k = 0; k < 4; ++k) {
        const StatePoint& e = eq[k];
        const auto ev = jacobian(e, cfg.params).eigenvalues();
        const Stability s = classify_equilibrium(e, cfg.params);
        const std::string name = "e" + std::to_string(k + 1);
        w.cell(name).cell(e.u1).cell(e.u2).cell(to_string(s));
        w.cell(ev[0].real()).cell(ev[0].imag()).cell(ev[1].real()).cell(ev[1].imag()).end_row();
        list.push_back({{"name", name}, {"u1", e.u1}, {"u2", e.u2}, {"stability", to_string(s)}});
    }
    return {{"equilibria", list}};
}

inline json run_front(const RunConfig& cfg, Output& out) {
    const FrontBlock& f = cfg.front;
    FrontProfile prof;
    double resid = 0.0;
    if (f.kind == "kpp") {
        prof = kpp_profile(f.c, cfg.params.d, cfg.params.r, f.domain);
        for (double v : kpp_residual(prof, cfg.params.d, cfg.params.r)) {
            resid = std::max(resid, std::abs(v));
        }
    } else {
        prof = system_front(f.c, cfg.params, f.ends, f.domain);
        resid = detail::sup_norm(profile_residual(prof, cfg.params));
    }
    {
        auto os = out.open("profile.csv");
        write_profile_csv(os, prof);
    }
    const auto mid = level_crossing(prof, 0, 0.5 * (prof.values.front().u1 + prof.values.back().u1));
    return {{"kind", f.kind},
            {"speed", f.c},
            {"ends", f.kind == "kpp" ? std::string("1-0") : std::string(to_string(f.ends))},
            {"half_width", f.domain.half_width},
            {"points", f.domain.points},
            {"max_residual", resid},
            {"tail_rate", num(detail::measure_tail_rate(prof))},
            {"midpoint", num(mid.value_or(std::numeric_limits<double>::quiet_NaN()))}};
}

inline json run_speed_region(const RunConfig& cfg, Output& out) {
    const RegionBlock& r = cfg.region;
    const RegionMap m = region_scan(linspace_step(r.c1_min, r.c1_max, r.c1_step),
                                    linspace_step(r.c2_min, r.c2_max, r.c2_step), cfg.params);
    {
        auto os = out.open("region.csv");
        write_region_csv(os, m);
    }
    {
        auto os = out.open("region_variant.csv");
        write_variant_csv(os, m);
    }
    // image: rows c1 (top = smallest), columns c2; 2 feasible, 1 interaction-excluded, 0 otherwise
    std::vector<double> img(m.cells.size());
    std::size_t feasible = 0, excluded = 0, differ = 0;
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
        const RegionCell& c = m.cells[i];
        img[i] = c.feasible ? 2.0 : (c.fail_1c ? 1.0 : 0.0);
        feasible += c.feasible;
        excluded += c.fail_1c;
        differ += c.feasible != c.variant_feasible;
    }
    out.image("region.pgm", img, m.c2_grid.size(), m.c1_grid.size());
    return {{"c1_points", m.c1_grid.size()},
            {"c2_points", m.c2_grid.size()},
            {"feasible", feasible},
            {"interaction_excluded", excluded},
            {"variant_differs", differ}};
}

inline json run_weight_check(const RunConfig& cfg, Output& out) {
    const WeightedCase wc = weighted_case(cfg);
    const TimeSpaceGrid& g = cfg.weight_check.grid;
    const DiagBoundReport rep = diag_bound_check(*wc.spec, wc.weight, cfg.params, g);
    {
        auto os = out.open("diag_bound.csv");
        CsvWriter w(os, {"region", "points", "max_diagonal"});
        for (int k = 0; k < 5; ++k) {
            w.cell(to_string(static_cast<Region>(k + 1))).cell(rep.region_count[static_cast<std::size_t>(k)]);
            w.cell(rep.region_max[static_cast<std::size_t>(k)]).end_row();
        }
    }
    const std::size_t st = cfg.weight_check.image_stride;
    TimeSpaceGrid coarse = g;
    coarse.dt = g.dt * static_cast<double>(st);
    coarse.dx = g.dx * static_cast<double>(st);
    const Heatmaps h = weight_heatmaps(*wc.spec, wc.weight, cfg.params, coarse);
    {
        auto os = out.open("weight_heatmap.csv");
        write_heatmap_csv(os, h, coarse);
    }
    out.image("phi.pgm", h.phi, h.width, h.height);
    out.image("a0_11.pgm", h.a11, h.width, h.height);
    out.image("a0_22.pgm", h.a22, h.width, h.height);
    json regions = json::object();
    for (int k = 0; k < 5; ++k) {
        regions[to_string(static_cast<Region>(k + 1))] = num(rep.region_max[static_cast<std::size_t>(k)]);
    }
    return {{"certificate", cert_json(wc.cert)},
            {"weight",
             {{"kappa1", wc.weight.kappa1}, {"kappa2", wc.weight.kappa2}, {"psi1", wc.weight.psi1},
              {"psi2", wc.weight.psi2}}},
            {"eta", rep.eta},
            {"bound_holds", rep.eta > 0.0},
            {"argmax", {{"t", rep.t_at}, {"x", rep.x_at}, {"entry", rep.entry + 1}, {"region", to_string(rep.region)}}},
            {"region_max", regions}};
}

/// Random points off the sector: rays from the apex, |angle| < 80 degrees, log-uniform radii.
inline std::vector<cplx> random_outside(const SectorSpec& s, std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(-80.0, 80.0), lr(std::log(0.05), std::log(50.0));
    std::vector<cplx> out;
    while (out.size() < n) {
        const cplx l = cplx(-s.eta, 0.0) + std::polar(std::exp(lr(rng)), ang(rng) * std::numbers::pi / 180.0);
        if (s.distance(l) > 0.0) {
            out.push_back(l);
        }
    }
    return out;
}

inline json run_numrange(const RunConfig& cfg, Output& out) {
    const WeightedCase wc = weighted_case(cfg);
    std::mt19937_64 rng(cfg.seed);
    json levels = json::array();
    for (double t : cfg.numrange.times) {
        const DiscreteOperator op = build_operator(t, *wc.spec, wc.weight, cfg.params, cfg.numrange.domain);
        const auto fov = field_of_values(op.matrix, cfg.numrange.angles);
        const auto pts = points_of(fov);
        const double eta = sector_eta(pts);
        const std::string tag = time_tag(t);
        {
            auto os = out.open("fov_t" + tag + ".csv");
            write_fov_csv(os, fov);
        }
        json level = {{"t", t}, {"max_real", max_real(fov)}, {"sector_eta", eta}, {"sector_found", eta > 0.0}};
        if (eta > 0.0 && cfg.numrange.samples > 0) {
            const SectorSpec s{eta};
            const ResolventReport r = resolvent_check(op.matrix, s, random_outside(s, cfg.numrange.samples, rng));
            auto os = out.open("resolvent_t" + tag + ".csv");
            write_resolvent_csv(os, r);
            level["resolvent_min_ratio"] = r.min_ratio;
            level["resolvent_ok"] = r.ok;
        }
        levels.push_back(level);
    }
    return {{"certificate", cert_json(wc.cert)},
            {"nodes", cfg.numrange.domain.nodes},
            {"x_lo", cfg.numrange.domain.x_lo},
            {"x_hi", cfg.numrange.domain.x_hi},
            {"angles", cfg.numrange.angles},
            {"seed", cfg.seed},
            {"levels", levels}};
}

/// Snapshot rows subsampled in x, for CSV and images.
inline void write_field_outputs(const SpaceTimeField& f, std::size_t stride, Output& out) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < f.x_grid.size(); j += stride) {
        cols.push_back(j);
    }
    {
        auto os = out.open("field.csv");
        CsvWriter w(os, {"t", "x", "u1", "u2"});
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            for (std::size_t j : cols) {
                w.cell(f.t_grid[i]).cell(f.x_grid[j]).cell(f.values[i][j].u1).cell(f.values[i][j].u2).end_row();
            }
        }
    }
    for (int k = 0; k < 2; ++k) {
        std::vector<double> img;
        img.reserve(cols.size() * f.values.size());
        for (const auto& row : f.values) {
            for (std::size_t j : cols) {
                img.push_back(row[j][k]);
            }
        }
        out.image(k == 0 ? "field_u1.pgm" : "field_u2.pgm", img, cols.size(), f.values.size());
    }
    {
        auto os = out.open("norms.csv");
        write_norm_csv(os, f);
    }
    {
        auto os = out.open("interfaces.csv");
        write_interface_csv(os, f);
    }
}

inline json interfaces_json(const InterfaceSummary& s) {
    return {{"speed_u1", num(s.speed_u1)},
            {"speed_u2", num(s.speed_u2)},
            {"separation_start", num(s.sep_start)},
            {"separation_end", num(s.sep_end)},
            {"count_start", s.count_start},
            {"count_end", s.count_end},
            {"separation_increasing", s.sep_increasing},
            {"separation_nonincreasing", s.sep_nonincreasing}};
}

inline json run_simulate(const RunConfig& cfg, Output& out) {
    const SimulateBlock& sb = cfg.simulate;
    ScenarioConfig sc;
    sc.params = cfg.params;
    sc.mode = sb.mode;
    sc.grid = sb.grid;
    sc.t_end = sb.t_end;
    sc.dt = sb.dt;
    sc.snapshot_stride = sb.snapshot_stride;
    sc.trace_stride = sb.trace_stride;
    sc.diffusion = sb.diffusion;
    sc.startup_steps = sb.startup_steps;
    sc.initial = sb.initial;
    json extra = json::object();
    if (sb.mode != Mode::nonlinear) {
        const WeightedCase wc = weighted_case(cfg);
        sc.spec = wc.spec;
        if (sb.mode == Mode::weighted_linear) {
            sc.weight = wc.weight;
        }
        if (sb.bump) {
            const BumpPreset b = bump_preset(*wc.spec, *sb.bump);
            sc.initial.bumps = {{b.center, 2.0, 1.0, true, true}};
            extra["bump"] = {{"name", b.name}, {"center", b.center}};
        }
        extra["certificate"] = cert_json(wc.cert);
    }
    const SpaceTimeField f = simulate(sc);
    write_field_outputs(f, sb.output_x_stride, out);
    json j = {{"mode", to_string(sb.mode)},
              {"params", params_json(cfg.params)},
              {"t_end", sb.t_end},
              {"dt", sb.dt},
              {"points", sb.grid.points}};
    if (sb.preset) {
        j["preset"] = *sb.preset;
    }
    for (auto& [k, v] : extra.items()) {
        j[k] = v;
    }
    double sup = 0.0;
    for (double n : f.norms) {
        sup = std::max(sup, n / f.norms.front());
    }
    j["norm_start"] = f.norms.front();
    j["norm_end"] = f.norms.back();
    j["sup_norm_ratio"] = num(sup);
    if (sb.mode != Mode::nonlinear) {
        try {
            const DecayFit fit = decay_fit(f.trace_t, f.norms, sb.fit_t0, sb.fit_t1);
            j["decay_fit"] = {{"eta", fit.eta}, {"C", fit.c}, {"C_relative", fit.c_relative}, {"r2", fit.r2},
                              {"t0", fit.t0},   {"t1", fit.t1}, {"samples", fit.samples}};
        } catch (const NumericalError& e) {
            j["decay_fit"] = {{"error", e.what()}};
        }
    } else {
        j["interfaces"] = interfaces_json(summarize_interfaces(f, sb.fit_t0, sb.fit_t1));
    }
    return j;
}

inline json run_figure(const RunConfig& cfg, Output& out) {
    const FigurePreset fp = figure_preset(cfg.figure);
    const SpaceTimeField f = simulate(fp.config);
    write_field_outputs(f, 10, out);
    const InterfaceSummary s = summarize_interfaces(f, fp.fit_t0, fp.fit_t1);
    json j = {{"preset", fp.name},
              {"params", params_json(fp.config.params)},
              {"t_end", fp.config.t_end},
              {"fit_window", {fp.fit_t0, fp.fit_t1}},
              {"interfaces", interfaces_json(s)}};
    if (fp.name == "fig1") {
        j["pulled_speed"] = 2.0 * std::sqrt(fp.config.params.d * fp.config.params.r);
    }
    return j;
}

inline json dispatch(const RunConfig& cfg, Output& out) {
    switch (cfg.command) {
        case Command::equilibria: return run_equilibria(cfg, out);
        case Command::front: return run_front(cfg, out);
        case Command::speed_region: return run_speed_region(cfg, out);
        case Command::weight_check: return run_weight_check(cfg, out);
        case Command::numrange: return run_numrange(cfg, out);
        case Command::simulate: return run_simulate(cfg, out);
        default: return run_figure(cfg, out);
    }
}

inline void write_manifest(const RunConfig& cfg, const Output& out, int status) {
    std::vector<std::string> names = out.files();
    std::sort(names.begin(), names.end());
    json files = json::array();
    for (const auto& n : names) {
        const fs::path p = out.dir() / n;
        files.push_back({{"path", n}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
    }
    json m = {{"command", to_string(cfg.command)}, {"status", status}, {"seed", cfg.seed}, {"files", files}};
    std::ofstream os(out.dir() / "manifest.json");
    os << m.dump(2) << '\n';
    if (!os) {
        throw Error("cannot write manifest in " + out.dir().string());
    }
}

}  // namespace cli_detail

/// Runs one command into cfg.out_dir, which must be absent or empty. Errors are recorded in
/// error.json; the manifest lists every file written except itself.
inline RunResult run(const RunConfig& cfg, std::ostream& log) {
    using namespace cli_detail;
    RunResult res;
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    if (fs::exists(dir, ec) && !fs::is_empty(dir, ec)) {
        res.status = kExitValidation;
        res.error = "output directory " + dir.string() + " is not empty";
        log << "error: " << res.error << '\n';
        return res;
    }
    fs::create_directories(dir, ec);
    if (ec) {
        res.status = kExitValidation;
        res.error = "cannot create " + dir.string() + ": " + ec.message();
        log << "error: " << res.error << '\n';
        return res;
    }
    Output out(dir);
    json summary;
    std::string kind;
    try {
        summary = dispatch(cfg, out);
    } catch (const ValidationError& e) {
        res.status = kExitValidation;
        res.error = e.what();
        kind = "validation";
    } catch (const NumericalError& e) {
        res.status = kExitNumerical;
        res.error = e.what();
        kind = "numerical";
    }
    if (res.status == kExitOk) {
        summary = json{{"command", to_string(cfg.command)}, {"result", summary}};
        out.write_json("summary.json", summary);
        log << summary.dump(2) << '\n';
    } else {
        out.write_json("error.json", {{"command", to_string(cfg.command)},
                                      {"kind", kind},
                                      {"exit_code", res.status},
                                      {"message", res.error}});
        log << "error (" << kind << "): " << res.error << '\n';
    }
    write_manifest(cfg, out, res.status);
    res.files = out.files();
    res.files.push_back("manifest.json");
    std::sort(res.files.begin(), res.files.end());
    return res;
}

}  // namespace terrace
