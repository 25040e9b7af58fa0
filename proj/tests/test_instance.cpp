#include "regret_lab/errors.hpp"
#include "regret_lab/instance.hpp"
#include "regret_lab/instance_io.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>

using namespace regret_lab;

namespace {

void expect_rows_stochastic(const TabularMdp& m) {
    for (int s = 0; s < m.num_states(); ++s)
        for (int a = 0; a < m.num_actions(); ++a) {
            double total = 0.0;
            for (double p : m.row(s, a)) total += p;
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
}

} // namespace

TEST(HardBandit, ZeroGap) {
    const auto b = make_hard_bandit(2, 0.5, 0.0, 0);
    EXPECT_EQ(b.means, (std::vector<double>{0.5, 0.5}));
}

TEST(HardBandit, StarredFourthArm) {
    const auto b = make_hard_bandit(4, 0.25, 0.0125, 3);
    EXPECT_EQ(b.means, (std::vector<double>{0.25, 0.25, 0.25, 0.2625}));
    EXPECT_DOUBLE_EQ(b.best_mean(), 0.2625);
}

TEST(HardBandit, RejectsMeanAboveOne) {
    try {
        make_hard_bandit(2, 0.9, 0.2, 0);
        FAIL();
    } catch (const ParameterError& e) {
        EXPECT_NE(std::string(e.what()).find("delta + eps <= 1"), std::string::npos);
    }
    EXPECT_THROW(make_hard_bandit(2, 0.2, 0.1, 2), ParameterError);
    EXPECT_THROW(make_hard_bandit(0, 0.2, 0.1, 0), ParameterError);
}

TEST(TwoState, Rows) {
    const auto m = to_tabular(make_two_state_mdp(2, 0.2, 0.2, 0.1, 1));
    EXPECT_NEAR(m.transition(1, 1, 0), 0.1, 1e-15);
    EXPECT_NEAR(m.transition(1, 1, 1), 0.9, 1e-15);
    EXPECT_NEAR(m.transition(1, 0, 0), 0.2, 1e-15);
    EXPECT_NEAR(m.transition(1, 0, 1), 0.8, 1e-15);
    for (int a = 0; a < 2; ++a) {
        EXPECT_NEAR(m.transition(0, a, 0), 0.8, 1e-15);
        EXPECT_NEAR(m.transition(0, a, 1), 0.2, 1e-15);
        EXPECT_EQ(m.reward(0, a), 0.0);
        EXPECT_EQ(m.reward(1, a), 1.0);
    }
}

TEST(TwoState, ZeroGapActionsIdentical) {
    const auto m = to_tabular(make_two_state_mdp(2, 0.5, 0.5, 0.0, 0));
    for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) EXPECT_EQ(m.transition(s, 0, t), m.transition(s, 1, t));
}

TEST(TwoState, RejectsGapAtDelta1) {
    try {
        make_two_state_mdp(2, 0.2, 0.1, 0.1, 0);
        FAIL();
    } catch (const ParameterError& e) {
        EXPECT_NE(std::string(e.what()).find("eps < delta1"), std::string::npos);
    }
}

TEST(Concat, SingleCopyMatchesGadget) {
    const auto g = make_two_state_mdp(3, 0.2, 0.3, 0.1, 2);
    EXPECT_EQ(concat_copies(g, 2), to_tabular(g));
}

TEST(Concat, BlocksAreDisjoint) {
    const auto g = make_two_state_mdp(2, 0.2, 0.3, 0.1, 0);
    const std::vector<int> starred{0, 1};
    const auto m = concat_copies(g, 4, starred);
    ASSERT_EQ(m.num_states(), 4);
    expect_rows_stochastic(m);
    for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 2; ++a)
            for (int t = 0; t < 4; ++t)
                if (s / 2 != t / 2) EXPECT_EQ(m.transition(s, a, t), 0.0);
    EXPECT_NEAR(m.transition(1, 0, 0), 0.2, 1e-15);
    EXPECT_NEAR(m.transition(3, 1, 2), 0.2, 1e-15);
    EXPECT_NEAR(m.transition(3, 0, 2), 0.3, 1e-15);
}

TEST(Concat, OddStateCountRoundsUp) {
    const auto g = make_two_state_mdp(2, 0.2, 0.3, 0.1, 0);
    EXPECT_EQ(concat_copies(g, 5).num_states(), 6);
    EXPECT_EQ(num_copies_for(5), 3);
}

TEST(Concat, SeededStarredIsReproducible) {
    const auto g = make_two_state_mdp(3, 0.2, 0.3, 0.1, 0);
    EXPECT_EQ(concat_copies(g, 8, std::uint64_t{11}), concat_copies(g, 8, std::uint64_t{11}));
    const auto drawn = draw_starred_per_copy(4, 3, 11);
    EXPECT_EQ(concat_copies(g, 8, std::uint64_t{11}), concat_copies(g, 8, drawn));
}

TEST(ToTabular, BanditIsOneState) {
    const auto m = to_tabular(make_hard_bandit(2, 0.5, 0.1, 1));
    EXPECT_EQ(m.num_states(), 1);
    EXPECT_EQ(m.transition(0, 0, 0), 1.0);
    EXPECT_EQ(m.reward(0, 0), 0.5);
    EXPECT_NEAR(m.reward(0, 1), 0.6, 1e-15);
}

TEST(TabularMdp, Validation) {
    EXPECT_THROW(TabularMdp(1, 1, {0.9}, {0.5}), ParameterError);
    EXPECT_THROW(TabularMdp(1, 1, {1.0}, {1.5}), ParameterError);
    EXPECT_THROW(TabularMdp(2, 1, {1.2, -0.2, 0.5, 0.5}, {0, 0}), ParameterError);
    EXPECT_NO_THROW(TabularMdp(1, 1, {1.0}, {1.0}));
}

TEST(FiniteHorizon, OneStepAlwaysResets) {
    const auto base = to_tabular(make_two_state_mdp(2, 0.2, 0.3, 0.1, 0));
    const auto e = finite_horizon(base, 1, {0.25, 0.75}).expand();
    ASSERT_EQ(e.num_states(), 2);
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) {
            EXPECT_EQ(e.transition(s, a, 0), 0.25);
            EXPECT_EQ(e.transition(s, a, 1), 0.75);
        }
}

TEST(FiniteHorizon, ThreePeriodExpansion) {
    const auto base = to_tabular(make_two_state_mdp(2, 0.2, 0.3, 0.1, 0));
    const auto fh = finite_horizon(base, 3, {1.0, 0.0});
    const auto e = fh.expand();
    ASSERT_EQ(e.num_states(), 6);
    expect_rows_stochastic(e);
    for (int h = 0; h < 3; ++h)
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) {
                const int from = fh.expanded_index(s, h);
                EXPECT_EQ(e.reward(from, a), base.reward(s, a));
                for (int t = 0; t < 2; ++t) {
                    const double expected = h < 2 ? base.transition(s, a, t) : (t == 0 ? 1.0 : 0.0);
                    const int to = fh.expanded_index(t, h < 2 ? h + 1 : 0);
                    EXPECT_EQ(e.transition(from, a, to), expected);
                }
            }
}

TEST(FiniteHorizon, Validation) {
    const auto base = to_tabular(make_two_state_mdp(2, 0.2, 0.3, 0.1, 0));
    EXPECT_THROW(finite_horizon(base, 0, {1.0, 0.0}), ParameterError);
    EXPECT_THROW(finite_horizon(base, 2, {1.0}), ParameterError);
    EXPECT_THROW(finite_horizon(base, 2, {0.7, 0.7}), ParameterError);
}

TEST(InstanceIo, RoundTripEveryKind) {
    const auto gadget = make_two_state_mdp(3, 0.2, 0.3, 0.1, 2);
    const std::vector<Instance> instances{
        make_hard_bandit(4, 0.25, 0.0125, 3),
        gadget,
        concat_copies(gadget, 6, std::uint64_t{3}),
        finite_horizon(to_tabular(gadget), 3, {0.5, 0.5}),
    };
    const auto dir = std::filesystem::temp_directory_path() / "regret_lab_io_test";
    std::filesystem::create_directories(dir);
    int k = 0;
    for (const auto& inst : instances) {
        EXPECT_EQ(instance_from_json(instance_to_json(inst)), inst);
        const auto path = dir / ("inst" + std::to_string(k++) + ".json");
        save_instance(inst, path);
        EXPECT_EQ(load_instance(path), inst);
    }
}

TEST(InstanceIo, FieldLevelErrors) {
    auto j = instance_to_json(make_hard_bandit(2, 0.25, 0.1, 0));
    j["params"].erase("delta");
    try {
        instance_from_json(j);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("delta"), std::string::npos);
    }
    auto k = instance_to_json(make_hard_bandit(2, 0.25, 0.1, 0));
    k["kind"] = "pentagon";
    EXPECT_THROW(instance_from_json(k), ConfigError);
    auto w = instance_to_json(make_two_state_mdp(2, 0.2, 0.1, 0.05, 0));
    w["params"]["delta0"] = "big";
    EXPECT_THROW(instance_from_json(w), ConfigError);
    EXPECT_THROW(load_instance("/nonexistent/regret_lab.json"), ConfigError);
}
