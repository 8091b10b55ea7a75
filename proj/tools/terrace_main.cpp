#include "terrace/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    using namespace terrace;
    CLI::App app{"Two-front terrace stability lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir, preset;
    std::uint64_t seed = 0;
    for (Command c : {Command::equilibria, Command::front, Command::speed_region, Command::weight_check,
                      Command::numrange, Command::simulate, Command::figure}) {
        CLI::App* sub = app.add_subcommand(to_string(c));
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--out", out_dir, "output directory (absent or empty)");
        sub->add_option("--seed", seed, "seed for sampled quantities");
        sub->add_option("--preset", preset, "fig1 | fig2-left | fig2-right");
    }
    CLI11_PARSE(app, argc, argv);

    CLI::App* sub = app.get_subcommands().front();
    ConfigOverrides ov;
    ov.command = command_from_string(sub->get_name());
    if (sub->count("--out")) {
        ov.out_dir = out_dir;
    }
    if (sub->count("--seed")) {
        ov.seed = seed;
    }
    if (sub->count("--preset")) {
        ov.preset = preset;
    }
    std::string text;
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "error: cannot read " << config_path << '\n';
            return kExitValidation;
        }
        std::ostringstream ss;
        ss << is.rdbuf();
        text = ss.str();
    }
    RunConfig cfg;
    try {
        cfg = parse_config(text, ov);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitValidation;
    }
    const RunResult r = run(cfg, std::cout);
    return r.status;
}
