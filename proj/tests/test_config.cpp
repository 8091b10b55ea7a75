#include "terrace/config.hpp"

#include <gtest/gtest.h>

using namespace terrace;

namespace {

const char* kParams = "[params]\nd = 4\nr = 2\nalpha1 = 0.05\nalpha2 = 0.05\n";

std::vector<std::string> errors_of(const std::string& text, const ConfigOverrides& ov = {}) {
    try {
        parse_config(text, ov);
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& needle) {
    for (const auto& e : errs) {
        if (e.find(needle) != std::string::npos) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST(Config, FigurePresetFillsParameters) {
    const RunConfig c = parse_config("command = figure\npreset = fig1\n");
    EXPECT_EQ(c.command, Command::figure);
    EXPECT_EQ(c.figure, "fig1");
    EXPECT_EQ(c.params.d, 4.0);
    EXPECT_EQ(c.params.r, 2.0);
    EXPECT_EQ(c.params.alpha1, 0.75);
    EXPECT_EQ(c.params.alpha2, 0.75);
}

TEST(Config, OverridesWin) {
    ConfigOverrides ov;
    ov.out_dir = "elsewhere";
    ov.seed = 99;
    ov.preset = "fig2-right";
    const RunConfig c = parse_config("command = figure\npreset = fig1\nout = here\nseed = 3\n", ov);
    EXPECT_EQ(c.out_dir, "elsewhere");
    EXPECT_EQ(c.seed, 99u);
    EXPECT_EQ(c.figure, "fig2-right");
    EXPECT_EQ(c.params.d, 0.2);
}

TEST(Config, SpeedOrderingNamed) {
    const auto errs = errors_of(std::string("command = weight-check\n") + kParams + "[weight]\nc1 = 6\nc2 = 3\n");
    ASSERT_FALSE(errs.empty());
    EXPECT_TRUE(mentions(errs, "c1 < c2"));
}

TEST(Config, MissingKeysListedTogether) {
    const auto errs = errors_of("command = front\n[params]\nd = 4\nr = 2\n[front]\nkind = kpp\n");
    EXPECT_TRUE(mentions(errs, "alpha1"));
    EXPECT_TRUE(mentions(errs, "alpha2"));
    EXPECT_TRUE(mentions(errs, "front.c"));
    EXPECT_GE(errs.size(), 3u);
}

TEST(Config, UnknownKeysAndSectionsRejected) {
    const auto errs =
        errors_of(std::string("command = equilibria\ncolour = red\n") + kParams + "gamma = 1\n[extras]\nq = 1\n");
    EXPECT_TRUE(mentions(errs, "colour"));
    EXPECT_TRUE(mentions(errs, "gamma"));
    EXPECT_TRUE(mentions(errs, "[extras]"));
}

TEST(Config, SyntaxErrorReportsLine) {
    const auto errs = errors_of("command = equilibria\n[params\nd = 4\n");
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_TRUE(mentions(errs, "line 2"));
    const auto dup = errors_of("command = equilibria\n[params]\nd = 4\nd = 5\n");
    ASSERT_EQ(dup.size(), 1u);
    EXPECT_TRUE(mentions(dup, "line 4"));
}

TEST(Config, BadNumbersAndCommands) {
    EXPECT_TRUE(mentions(errors_of("command = fly\n"), "unknown command"));
    EXPECT_TRUE(mentions(errors_of("[params]\nd = 4\n"), "missing required key command"));
    const auto errs = errors_of("command = equilibria\n[params]\nd = four\nr = 2\nalpha1 = 0.1\nalpha2 = 0.1\n");
    EXPECT_TRUE(mentions(errs, "params.d"));
    ConfigOverrides ov;
    ov.command = Command::front;
    EXPECT_TRUE(mentions(errors_of(std::string("command = equilibria\n") + kParams, ov), "requested"));
}

TEST(Config, CommentsAccepted) {
    const RunConfig c = parse_config(std::string("# leading comment\n; another\ncommand = equilibria\n") + kParams);
    EXPECT_EQ(c.params.alpha1, 0.05);
}

TEST(Config, SimulateLists) {
    const RunConfig c = parse_config(std::string("command = simulate\n") +
                                     "[params]\nd = 4\nr = 2\nalpha1 = 0.75\nalpha2 = 0.75\n"
                                     "[simulate]\nx_lo = -50\nx_hi = 50\npoints = 1001\nt_end = 2\n"
                                     "background = e4\nsteps = -30 30 e3 | -5 5 0.5:0.25\n"
                                     "bumps = 10 1 0.05 u2 | 0 2 1\n");
    const auto& s = c.simulate;
    ASSERT_EQ(s.initial.steps.size(), 2u);
    EXPECT_EQ(s.initial.steps[0].state, (StatePoint{1.0, 0.0}));
    EXPECT_EQ(s.initial.steps[1].state, (StatePoint{0.5, 0.25}));
    ASSERT_EQ(s.initial.bumps.size(), 2u);
    EXPECT_FALSE(s.initial.bumps[0].on_u1);
    EXPECT_TRUE(s.initial.bumps[0].on_u2);
    EXPECT_TRUE(s.initial.bumps[1].on_u1 && s.initial.bumps[1].on_u2);
    EXPECT_EQ(s.grid.points, 1001u);

    const auto errs = errors_of(std::string("command = simulate\n") + kParams +
                                "[simulate]\nx_lo = -50\nx_hi = 50\nt_end = 2\nsteps = 1 2\nmode = sideways\n");
    EXPECT_TRUE(mentions(errs, "simulate.points"));
    EXPECT_TRUE(mentions(errs, "steps"));
    EXPECT_TRUE(mentions(errs, "mode"));
}

TEST(Config, CommandNamesRoundTrip) {
    for (Command c : {Command::equilibria, Command::front, Command::speed_region, Command::weight_check,
                      Command::numrange, Command::simulate, Command::figure}) {
        EXPECT_EQ(command_from_string(to_string(c)), c);
    }
    EXPECT_FALSE(command_from_string("bogus").has_value());
}
