#pragma once

// Flat key = value run configuration: top-level keys, then one section per command.

#include "terrace/evolve.hpp"
#include "terrace/fronts.hpp"
#include "terrace/model.hpp"
#include "terrace/spectral.hpp"
#include "terrace/weights.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace terrace {

enum class Command { equilibria, front, speed_region, weight_check, numrange, simulate, figure };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::equilibria: return "equilibria";
        case Command::front: return "front";
        case Command::speed_region: return "speed-region";
        case Command::weight_check: return "weight-check";
        case Command::numrange: return "numrange";
        case Command::simulate: return "simulate";
        default: return "figure";
    }
}

inline std::optional<Command> command_from_string(std::string_view s) {
    for (Command c : {Command::equilibria, Command::front, Command::speed_region, Command::weight_check,
                      Command::numrange, Command::simulate, Command::figure}) {
        if (s == to_string(c)) {
            return c;
        }
    }
    return std::nullopt;
}

/// Thrown with every problem found, one entry each.
class ConfigError : public ValidationError {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : ValidationError(join(errors)), errors_(std::move(errors)) {}
    const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& e) {
        std::string s = "invalid configuration:";
        for (const auto& x : e) {
            s += "\n  " + x;
        }
        return s;
    }
    std::vector<std::string> errors_;
};

struct FrontBlock {
    std::string kind = "kpp";  // kpp | system
    double c = 0.0;
    FrontEnds ends = FrontEnds::e1_e3;
    ProfileDomain domain;
};

struct RegionBlock {
    double c1_min = 2.0, c1_max = 6.0, c1_step = 0.05;
    double c2_min = 5.0, c2_max = 20.0, c2_step = 0.1;
};

/// Speeds, rates and shifts of a weighted two-front setup.
struct WeightBlock {
    double c1 = 0.0;
    double c2 = 0.0;
    std::optional<double> kappa1;
    std::optional<double> kappa2;  // set: weight built from given rates, certificate ignored
    double psi1 = -10.0;
    double psi2 = 10.0;
    std::optional<ProfileDomain> profile1;
    std::optional<ProfileDomain> profile2;
};

struct WeightCheckBlock {
    TimeSpaceGrid grid;
    std::size_t image_stride = 10;  // heatmap subsampling in t and x
};

struct NumrangeBlock {
    std::vector<double> times{0.0, 5.0, 10.0};
    OperatorDomain domain;
    int angles = 64;
    std::size_t samples = 20;
};

struct SimulateBlock {
    std::optional<std::string> preset;
    Mode mode = Mode::nonlinear;
    SpaceGrid grid;
    double t_end = 0.0;
    double dt = 0.01;
    std::size_t snapshot_stride = 50;
    std::size_t trace_stride = 10;
    DiffusionScheme diffusion = DiffusionScheme::implicit;
    int startup_steps = 4;
    InitialCondition initial;
    std::optional<std::string> bump;  // between | leading, for linear modes
    double fit_t0 = 5.0;
    double fit_t1 = 40.0;
    std::size_t output_x_stride = 10;
};

struct RunConfig {
    Command command = Command::equilibria;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    ModelParams params;
    bool params_given = false;
    FrontBlock front;
    RegionBlock region;
    WeightBlock weight;
    WeightCheckBlock weight_check;
    NumrangeBlock numrange;
    SimulateBlock simulate;
    std::string figure;  // preset name
};

/// Values given on the command line; they win over the file.
struct ConfigOverrides {
    std::optional<Command> command;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> preset;
};

namespace config_detail {

namespace pt = boost::property_tree;

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string> words(std::string_view s) {
    std::istringstream is{std::string(s)};
    std::vector<std::string> w;
    for (std::string x; is >> x;) {
        w.push_back(x);
    }
    return w;
}

inline std::optional<double> to_double(std::string_view s) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<std::uint64_t> to_uint(std::string_view s) {
    const std::string t = trim(s);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
        return std::nullopt;
    }
    return v;
}

/// Reads typed values and records every problem instead of stopping.
class Reader {
public:
    Reader(const pt::ptree& root, std::vector<std::string>& errors) : root_(root), errors_(errors) {}

    bool has_section(const std::string& sec) const { return root_.get_child_optional(sec).has_value(); }

    std::optional<std::string> raw(const std::string& sec, const std::string& key) const {
        const pt::ptree* node = sec.empty() ? &root_ : nullptr;
        if (!sec.empty()) {
            const auto c = root_.get_child_optional(sec);
            if (!c) {
                return std::nullopt;
            }
            node = &*c;
        }
        const auto v = node->get_child_optional(key);
        if (!v || !v->empty()) {
            return std::nullopt;
        }
        return trim(v->data());
    }

    static std::string name(const std::string& sec, const std::string& key) { return sec.empty() ? key : sec + "." + key; }

    std::optional<double> number(const std::string& sec, const std::string& key) {
        const auto r = raw(sec, key);
        if (!r) {
            return std::nullopt;
        }
        const auto v = to_double(*r);
        if (!v) {
            errors_.push_back(name(sec, key) + ": expected a number, got '" + *r + "'");
        }
        return v;
    }

    double number_or(const std::string& sec, const std::string& key, double def) {
        return number(sec, key).value_or(def);
    }

    double required_number(const std::string& sec, const std::string& key) {
        if (!raw(sec, key)) {
            errors_.push_back("missing required key " + name(sec, key));
            return 0.0;
        }
        return number(sec, key).value_or(0.0);
    }

    std::optional<std::uint64_t> count(const std::string& sec, const std::string& key) {
        const auto r = raw(sec, key);
        if (!r) {
            return std::nullopt;
        }
        const auto v = to_uint(*r);
        if (!v) {
            errors_.push_back(name(sec, key) + ": expected a non-negative integer, got '" + *r + "'");
        }
        return v;
    }

    std::optional<bool> flag(const std::string& sec, const std::string& key) {
        const auto r = raw(sec, key);
        if (!r) {
            return std::nullopt;
        }
        if (*r == "true" || *r == "1" || *r == "yes") {
            return true;
        }
        if (*r == "false" || *r == "0" || *r == "no") {
            return false;
        }
        errors_.push_back(name(sec, key) + ": expected true or false, got '" + *r + "'");
        return std::nullopt;
    }

    std::vector<double> numbers(const std::string& sec, const std::string& key, std::vector<double> def) {
        const auto r = raw(sec, key);
        if (!r) {
            return def;
        }
        std::vector<double> out;
        for (const auto& item : split(*r, ',')) {
            const auto v = to_double(item);
            if (!v) {
                errors_.push_back(name(sec, key) + ": bad list entry '" + item + "'");
                return def;
            }
            out.push_back(*v);
        }
        return out;
    }

    void error(std::string e) { errors_.push_back(std::move(e)); }

private:
    const pt::ptree& root_;
    std::vector<std::string>& errors_;
};

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"", {"command", "out", "seed", "preset"}},
        {"params", {"d", "r", "alpha1", "alpha2"}},
        {"front", {"kind", "c", "ends", "half_width", "points"}},
        {"speed-region", {"c1_min", "c1_max", "c1_step", "c2_min", "c2_max", "c2_step"}},
        {"weight",
         {"c1", "c2", "kappa1", "kappa2", "psi1", "psi2", "profile1_half_width", "profile1_points",
          "profile2_half_width", "profile2_points"}},
        {"weight-check", {"t0", "t1", "dt", "x0", "x1", "dx", "image_stride"}},
        {"numrange", {"times", "x_lo", "x_hi", "nodes", "angles", "samples"}},
        {"simulate",
         {"preset", "mode", "x_lo", "x_hi", "points", "t_end", "dt", "snapshot_stride", "trace_stride", "diffusion",
          "startup_steps", "background", "steps", "bumps", "bump", "normalize", "fit_t0", "fit_t1",
          "output_x_stride"}},
        {"figure", {"preset"}},
    };
    return keys;
}

inline void check_keys(const pt::ptree& root, std::vector<std::string>& errors) {
    const auto& allowed = allowed_keys();
    for (const auto& [k, v] : root) {
        if (v.empty()) {
            if (!allowed.at("").count(k)) {
                errors.push_back("unknown top-level key '" + k + "'");
            }
            continue;
        }
        const auto it = allowed.find(k);
        if (it == allowed.end() || k.empty()) {
            errors.push_back("unknown section [" + k + "]");
            continue;
        }
        for (const auto& [kk, vv] : v) {
            if (!it->second.count(kk)) {
                errors.push_back("unknown key '" + kk + "' in [" + k + "]");
            }
        }
    }
}

/// "e1".."e4" or "a:b".
inline std::optional<StatePoint> parse_state(const std::string& s, const ModelParams& p) {
    if (s.size() == 2 && s[0] == 'e' && s[1] >= '1' && s[1] <= '4') {
        if (s[1] == '1' && !(p.r - p.alpha1 * p.alpha2 > 0.0)) {
            return std::nullopt;
        }
        return equilibria(p)[s[1] - '1'];
    }
    const auto parts = split(s, ':');
    if (parts.size() == 2) {
        const auto a = to_double(parts[0]), b = to_double(parts[1]);
        if (a && b) {
            return StatePoint{*a, *b};
        }
    }
    return std::nullopt;
}

inline std::optional<ProfileDomain> profile_domain(Reader& rd, const std::string& prefix) {
    const auto l = rd.number("weight", prefix + "_half_width");
    const auto n = rd.count("weight", prefix + "_points");
    if (!l && !n) {
        return std::nullopt;
    }
    ProfileDomain d;
    d.half_width = l.value_or(d.half_width);
    d.points = static_cast<std::size_t>(n.value_or(d.points));
    return d;
}

}  // namespace config_detail

/// Parses and validates. Syntax errors stop parsing (with the line number); all semantic
/// problems are collected and reported together.
inline RunConfig parse_config(const std::string& text, const ConfigOverrides& ov = {}) {
    namespace pt = boost::property_tree;
    using namespace config_detail;
    pt::ptree root;
    {
        std::istringstream is(text);
        try {
            pt::read_ini(is, root);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError({"syntax error at line " + std::to_string(e.line()) + ": " + e.message()});
        }
    }
    std::vector<std::string> errors;
    check_keys(root, errors);
    Reader rd(root, errors);
    RunConfig cfg;

    // command
    const auto cmd_text = rd.raw("", "command");
    std::optional<Command> cmd;
    if (cmd_text) {
        cmd = command_from_string(*cmd_text);
        if (!cmd) {
            errors.push_back("command: unknown command '" + *cmd_text + "'");
        }
    }
    if (ov.command) {
        if (cmd && *cmd != *ov.command) {
            errors.push_back(std::string("command: file says '") + to_string(*cmd) + "' but '" +
                             to_string(*ov.command) + "' was requested");
        }
        cmd = ov.command;
    }
    if (!cmd) {
        if (!cmd_text) {
            errors.push_back("missing required key command");
        }
        throw ConfigError(errors);
    }
    cfg.command = *cmd;
    cfg.out_dir = ov.out_dir.value_or(rd.raw("", "out").value_or(cfg.out_dir));
    cfg.seed = ov.seed ? *ov.seed : rd.count("", "seed").value_or(cfg.seed);
    std::optional<std::string> preset = ov.preset;
    if (!preset) {
        preset = rd.raw("", "preset");
    }
    if (!preset && cfg.command == Command::simulate) {
        preset = rd.raw("simulate", "preset");
    }
    if (!preset && cfg.command == Command::figure) {
        preset = rd.raw("figure", "preset");
    }

    // params: required unless a preset supplies them
    const bool preset_params = preset && (cfg.command == Command::simulate || cfg.command == Command::figure);
    cfg.params_given = rd.has_section("params");
    if (preset_params) {
        try {
            cfg.params = figure_preset(*preset).config.params;
        } catch (const ValidationError& e) {
            errors.push_back(std::string("preset: ") + e.what());
        }
        cfg.params.d = rd.number_or("params", "d", cfg.params.d);
        cfg.params.r = rd.number_or("params", "r", cfg.params.r);
        cfg.params.alpha1 = rd.number_or("params", "alpha1", cfg.params.alpha1);
        cfg.params.alpha2 = rd.number_or("params", "alpha2", cfg.params.alpha2);
    } else if (cfg.command != Command::figure) {
        cfg.params.d = rd.required_number("params", "d");
        cfg.params.r = rd.required_number("params", "r");
        cfg.params.alpha1 = rd.required_number("params", "alpha1");
        cfg.params.alpha2 = rd.required_number("params", "alpha2");
    }
    if (cfg.command != Command::figure && errors.empty()) {
        try {
            cfg.params.validate();
        } catch (const ValidationError& e) {
            errors.push_back(std::string("params: ") + e.what());
        }
    }

    switch (cfg.command) {
        case Command::equilibria:
            break;
        case Command::front: {
            FrontBlock& f = cfg.front;
            f.kind = rd.raw("front", "kind").value_or(f.kind);
            if (f.kind != "kpp" && f.kind != "system") {
                errors.push_back("front.kind: expected kpp or system, got '" + f.kind + "'");
            }
            f.c = rd.required_number("front", "c");
            if (!(f.c > 0.0) && rd.raw("front", "c")) {
                errors.push_back("front.c must be positive");
            }
            const std::string ends = rd.raw("front", "ends").value_or("e1-e3");
            if (ends == "e1-e3") {
                f.ends = FrontEnds::e1_e3;
            } else if (ends == "e1-e4") {
                f.ends = FrontEnds::e1_e4;
            } else {
                errors.push_back("front.ends: expected e1-e3 or e1-e4, got '" + ends + "'");
            }
            f.domain.half_width = rd.number_or("front", "half_width", f.domain.half_width);
            f.domain.points = static_cast<std::size_t>(rd.count("front", "points").value_or(f.domain.points));
            if (!(f.domain.half_width > 0.0) || f.domain.points < 5) {
                errors.push_back("front: half_width must be positive and points >= 5");
            }
            break;
        }
        case Command::speed_region: {
            RegionBlock& r = cfg.region;
            r.c1_min = rd.number_or("speed-region", "c1_min", r.c1_min);
            r.c1_max = rd.number_or("speed-region", "c1_max", r.c1_max);
            r.c1_step = rd.number_or("speed-region", "c1_step", r.c1_step);
            r.c2_min = rd.number_or("speed-region", "c2_min", r.c2_min);
            r.c2_max = rd.number_or("speed-region", "c2_max", r.c2_max);
            r.c2_step = rd.number_or("speed-region", "c2_step", r.c2_step);
            if (!(r.c1_step > 0.0 && r.c2_step > 0.0)) {
                errors.push_back("speed-region: c1_step and c2_step must be positive");
            }
            if (!(r.c1_min > 0.0 && r.c1_max >= r.c1_min)) {
                errors.push_back("speed-region: need 0 < c1_min <= c1_max");
            }
            if (!(r.c2_min > 0.0 && r.c2_max >= r.c2_min)) {
                errors.push_back("speed-region: need 0 < c2_min <= c2_max");
            }
            break;
        }
        default:
            break;
    }

    const bool needs_weight = cfg.command == Command::weight_check || cfg.command == Command::numrange ||
                              (cfg.command == Command::simulate && !preset && rd.raw("simulate", "mode") &&
                               *rd.raw("simulate", "mode") != "nonlinear");
    if (needs_weight) {
        WeightBlock& w = cfg.weight;
        w.c1 = rd.required_number("weight", "c1");
        w.c2 = rd.required_number("weight", "c2");
        w.kappa1 = rd.number("weight", "kappa1");
        w.kappa2 = rd.number("weight", "kappa2");
        w.psi1 = rd.number_or("weight", "psi1", w.psi1);
        w.psi2 = rd.number_or("weight", "psi2", w.psi2);
        w.profile1 = profile_domain(rd, "profile1");
        w.profile2 = profile_domain(rd, "profile2");
        if (rd.raw("weight", "c1") && rd.raw("weight", "c2") && !(w.c1 < w.c2)) {
            errors.push_back("weight.c1 must be smaller than weight.c2 (speed ordering c1 < c2)");
        }
        if (!(w.c1 > 0.0) && rd.raw("weight", "c1")) {
            errors.push_back("weight.c1 must be positive");
        }
        if (w.kappa2 && !w.kappa1) {
            errors.push_back("weight.kappa2 given without weight.kappa1");
        }
        if ((w.kappa1 && !(*w.kappa1 > 0.0)) || (w.kappa2 && !(*w.kappa2 > 0.0))) {
            errors.push_back("weight: kappa1, kappa2 must be positive");
        }
        if (!(w.psi2 - w.psi1 >= 2.0)) {
            errors.push_back("weight: psi2 - psi1 must be at least 2");
        }
    }

    if (cfg.command == Command::weight_check) {
        TimeSpaceGrid& g = cfg.weight_check.grid;
        g.t0 = rd.number_or("weight-check", "t0", g.t0);
        g.t1 = rd.number_or("weight-check", "t1", g.t1);
        g.dt = rd.number_or("weight-check", "dt", g.dt);
        g.x0 = rd.number_or("weight-check", "x0", g.x0);
        g.x1 = rd.number_or("weight-check", "x1", g.x1);
        g.dx = rd.number_or("weight-check", "dx", g.dx);
        cfg.weight_check.image_stride =
            static_cast<std::size_t>(rd.count("weight-check", "image_stride").value_or(cfg.weight_check.image_stride));
        if (!(g.dt > 0.0 && g.dx > 0.0 && g.t1 >= g.t0 && g.t0 >= 0.0 && g.x1 > g.x0)) {
            errors.push_back("weight-check: need dt, dx > 0, t1 >= t0 >= 0 and x1 > x0");
        }
        if (cfg.weight_check.image_stride == 0) {
            errors.push_back("weight-check.image_stride must be positive");
        }
    }

    if (cfg.command == Command::numrange) {
        NumrangeBlock& n = cfg.numrange;
        n.times = rd.numbers("numrange", "times", n.times);
        n.domain.x_lo = rd.number_or("numrange", "x_lo", n.domain.x_lo);
        n.domain.x_hi = rd.number_or("numrange", "x_hi", n.domain.x_hi);
        n.domain.nodes = static_cast<std::size_t>(rd.count("numrange", "nodes").value_or(n.domain.nodes));
        n.angles = static_cast<int>(rd.count("numrange", "angles").value_or(static_cast<std::uint64_t>(n.angles)));
        n.samples = static_cast<std::size_t>(rd.count("numrange", "samples").value_or(n.samples));
        if (n.times.empty() || std::any_of(n.times.begin(), n.times.end(), [](double t) { return t < 0.0; })) {
            errors.push_back("numrange.times must be a non-empty list of non-negative times");
        }
        if (!(n.domain.x_hi > n.domain.x_lo) || n.domain.nodes < 2) {
            errors.push_back("numrange: need x_hi > x_lo and nodes >= 2");
        }
        if (n.angles < 8) {
            errors.push_back("numrange.angles must be at least 8");
        }
    }

    if (cfg.command == Command::simulate) {
        SimulateBlock& s = cfg.simulate;
        s.preset = preset;
        const std::string sec = "simulate";
        if (preset) {
            try {
                const FigurePreset fp = figure_preset(*preset);
                s.mode = fp.config.mode;
                s.grid = fp.config.grid;
                s.t_end = fp.config.t_end;
                s.dt = fp.config.dt;
                s.snapshot_stride = fp.config.snapshot_stride;
                s.trace_stride = fp.config.trace_stride;
                s.initial = fp.config.initial;
                s.fit_t0 = fp.fit_t0;
                s.fit_t1 = fp.fit_t1;
            } catch (const ValidationError& e) {
                // reported with the params above
            }
        }
        const auto mode = rd.raw(sec, "mode");
        if (mode) {
            if (*mode == "nonlinear") {
                s.mode = Mode::nonlinear;
            } else if (*mode == "linear_at_ansatz") {
                s.mode = Mode::linear_at_ansatz;
            } else if (*mode == "weighted_linear") {
                s.mode = Mode::weighted_linear;
            } else {
                errors.push_back("simulate.mode: expected nonlinear, linear_at_ansatz or weighted_linear, got '" +
                                 *mode + "'");
            }
        }
        if (preset) {
            s.grid.x_lo = rd.number_or(sec, "x_lo", s.grid.x_lo);
            s.grid.x_hi = rd.number_or(sec, "x_hi", s.grid.x_hi);
            s.grid.points = static_cast<std::size_t>(rd.count(sec, "points").value_or(s.grid.points));
            s.t_end = rd.number_or(sec, "t_end", s.t_end);
        } else {
            s.grid.x_lo = rd.required_number(sec, "x_lo");
            s.grid.x_hi = rd.required_number(sec, "x_hi");
            if (!rd.raw(sec, "points")) {
                errors.push_back("missing required key simulate.points");
            }
            s.grid.points = static_cast<std::size_t>(rd.count(sec, "points").value_or(0));
            s.t_end = rd.required_number(sec, "t_end");
        }
        s.dt = rd.number_or(sec, "dt", s.dt);
        s.snapshot_stride = static_cast<std::size_t>(rd.count(sec, "snapshot_stride").value_or(s.snapshot_stride));
        s.trace_stride = static_cast<std::size_t>(rd.count(sec, "trace_stride").value_or(s.trace_stride));
        s.startup_steps = static_cast<int>(
            rd.count(sec, "startup_steps").value_or(static_cast<std::uint64_t>(s.mode == Mode::nonlinear ? 4 : 0)));
        if (const auto d = rd.raw(sec, "diffusion")) {
            if (*d == "implicit") {
                s.diffusion = DiffusionScheme::implicit;
            } else if (*d == "explicit") {
                s.diffusion = DiffusionScheme::explicit_euler;
            } else {
                errors.push_back("simulate.diffusion: expected implicit or explicit, got '" + *d + "'");
            }
        }
        s.fit_t0 = rd.number_or(sec, "fit_t0", s.fit_t0);
        s.fit_t1 = rd.number_or(sec, "fit_t1", s.fit_t1);
        s.output_x_stride = static_cast<std::size_t>(rd.count(sec, "output_x_stride").value_or(s.output_x_stride));
        if (const auto b = rd.raw(sec, "background")) {
            if (const auto st = parse_state(*b, cfg.params)) {
                s.initial.background = *st;
            } else {
                errors.push_back("simulate.background: expected e1..e4 or a:b, got '" + *b + "'");
            }
        }
        if (const auto st = rd.raw(sec, "steps")) {
            s.initial.steps.clear();
            for (const auto& item : split(*st, '|')) {
                const auto w = words(item);
                std::optional<StepPiece> piece;
                if (w.size() == 3) {
                    const auto a = to_double(w[0]), b = to_double(w[1]);
                    const auto state = parse_state(w[2], cfg.params);
                    if (a && b && state && *a < *b) {
                        piece = StepPiece{*a, *b, *state};
                    }
                }
                if (!piece) {
                    errors.push_back("simulate.steps: expected 'a b state' with a < b, got '" + item + "'");
                    continue;
                }
                s.initial.steps.push_back(*piece);
            }
        }
        if (const auto bs = rd.raw(sec, "bumps")) {
            s.initial.bumps.clear();
            for (const auto& item : split(*bs, '|')) {
                const auto w = words(item);
                std::optional<GaussianBump> bump;
                const std::string comp = w.size() == 4 ? w[3] : "both";
                if ((w.size() == 3 || w.size() == 4) && (comp == "u1" || comp == "u2" || comp == "both")) {
                    const auto c = to_double(w[0]), wd = to_double(w[1]), amp = to_double(w[2]);
                    if (c && wd && amp && *wd > 0.0) {
                        bump = GaussianBump{*c, *wd, *amp, comp != "u2", comp != "u1"};
                    }
                }
                if (!bump) {
                    errors.push_back("simulate.bumps: expected 'center width amplitude [u1|u2|both]', got '" + item +
                                     "'");
                    continue;
                }
                s.initial.bumps.push_back(*bump);
            }
        }
        s.bump = rd.raw(sec, "bump");
        if (s.bump && *s.bump != "between" && *s.bump != "leading") {
            errors.push_back("simulate.bump: expected between or leading, got '" + *s.bump + "'");
        }
        if (s.bump && s.mode == Mode::nonlinear) {
            errors.push_back("simulate.bump applies to linear modes only");
        }
        s.initial.normalize_l2 = rd.flag(sec, "normalize").value_or(s.initial.normalize_l2 || s.bump.has_value());
        if (!(s.grid.x_hi > s.grid.x_lo) || s.grid.points < 5) {
            errors.push_back("simulate: need x_hi > x_lo and points >= 5");
        }
        if (!(s.dt > 0.0) || !(s.t_end > 0.0)) {
            errors.push_back("simulate: dt and t_end must be positive");
        }
        if (s.snapshot_stride == 0 || s.trace_stride == 0 || s.output_x_stride == 0) {
            errors.push_back("simulate: strides must be positive");
        }
        if (s.diffusion == DiffusionScheme::explicit_euler && s.grid.points >= 5 && s.grid.x_hi > s.grid.x_lo &&
            !(s.dt <= 0.25 * s.grid.step() * s.grid.step() / std::max(cfg.params.d, 1.0))) {
            errors.push_back("simulate.dt: explicit diffusion needs dt <= 0.25 dx^2 / max(d, 1)");
        }
        if (s.mode != Mode::nonlinear && !s.bump && s.initial.bumps.empty() && s.initial.steps.empty()) {
            errors.push_back("simulate: linear modes need bump = between|leading or explicit bumps/steps");
        }
    }

    if (cfg.command == Command::figure) {
        if (!preset) {
            errors.push_back("missing required key figure.preset (or --preset)");
        } else {
            try {
                figure_preset(*preset);
                cfg.figure = *preset;
            } catch (const ValidationError& e) {
                errors.push_back(std::string("figure.preset: ") + e.what());
            }
        }
    }

    if (!errors.empty()) {
        throw ConfigError(errors);
    }
    return cfg;
}

}  // namespace terrace
