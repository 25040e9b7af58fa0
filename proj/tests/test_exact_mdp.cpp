#include "oracles.hpp"

#include "regret_lab/errors.hpp"
#include "regret_lab/exact_mdp.hpp"
#include "regret_lab/philox.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace regret_lab;

namespace {

TabularMdp gadget(double d0, double d1, double eps, int starred = 1, int A = 2) {
    return to_tabular(make_two_state_mdp(A, d0, d1, eps, starred));
}

} // namespace

TEST(AverageReward, SymmetricChain) {
    const auto m = gadget(0.3, 0.3, 0.0);
    for (double g : average_reward(m, {0, 1})) EXPECT_NEAR(g, 0.5, 1e-12);
}

TEST(AverageReward, AvoidingStarredAction) {
    const auto m = gadget(0.1, 0.3, 0.05);
    const auto g = average_reward(m, {0, 0});
    EXPECT_NEAR(g[0], 0.25, 1e-12);
    EXPECT_NEAR(g[1], 0.25, 1e-12);
    EXPECT_NEAR(g[0], oracle::gain_by_power(m, {0, 0}), 1e-12);
}

TEST(AverageReward, BanditArm) {
    const auto m = to_tabular(make_hard_bandit(3, 0.2, 0.3, 2));
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(average_reward(m, {a})[0], m.reward(0, a), 1e-15);
}

TEST(AverageReward, MatchesPowerIterationOnRandomMdps) {
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        const auto m = oracle::random_mdp(2 + seed % 3, 2, seed);
        std::vector<int> mu(static_cast<std::size_t>(m.num_states()));
        for (int s = 0; s < m.num_states(); ++s) mu[s] = (s + static_cast<int>(seed)) % 2;
        const auto g = average_reward(m, mu);
        const auto d = stationary_distribution(m, mu);
        const auto d_ref = oracle::stationary_by_power(m, mu);
        double mass = 0.0;
        for (int s = 0; s < m.num_states(); ++s) {
            EXPECT_NEAR(g[s], g[0], 1e-12);
            EXPECT_NEAR(d[s], d_ref[s], 1e-12);
            mass += d[s];
        }
        EXPECT_NEAR(mass, 1.0, 1e-12);
        EXPECT_NEAR(g[0], oracle::gain_by_power(m, mu), 1e-12);
    }
}

TEST(AverageReward, RejectsMultichain) {
    const auto m = concat_copies(make_two_state_mdp(2, 0.2, 0.3, 0.1, 0), 4);
    EXPECT_THROW(average_reward(m, {0, 0, 0, 0}), NonUnichainError);
    EXPECT_EQ(closed_classes(m, {0, 0, 0, 0}).size(), 2u);
}

TEST(Theta, ClosedForms) {
    EXPECT_DOUBLE_EQ(theta1(0.2, 0.2), 0.5);
    EXPECT_NEAR(theta1(0.1, 0.3), 0.25, 1e-15);
    EXPECT_NEAR(theta1(0.1, 0.3), average_reward(gadget(0.1, 0.3, 0.0), {0, 0})[0], 1e-12);
    EXPECT_NEAR(theta1_star(0.2, 0.2, 0.1), 0.2 / 0.3, 1e-15);
    EXPECT_NEAR(theta1_star(0.2, 0.2, 0.1), average_reward(gadget(0.2, 0.2, 0.1), {0, 1})[0], 1e-12);
}

TEST(OptimalGap, Values) {
    EXPECT_NEAR(optimal_gap(0.2, 0.2, 0.1), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(optimal_gap(0.2, 0.2, 0.1), theta1_star(0.2, 0.2, 0.1) - theta1(0.2, 0.2), 1e-15);
    EXPECT_EQ(optimal_gap(0.3, 0.1, 0.0), 0.0);
    EXPECT_GT(optimal_gap(0.2, 0.2, 0.1), 0.1 / (4 * 0.2));
}

TEST(OptimalGap, ExceedsQuarterRatioWheneverDelta0AtLeastDelta1) {
    for (int i = 1; i <= 20; ++i)
        for (int j = 1; j <= i; ++j)
            for (int k = 1; k < 10; ++k) {
                const double d0 = 0.05 * i;
                const double d1 = 0.05 * j;
                const double eps = d1 * k / 10.0;
                EXPECT_GT(optimal_gap(d0, d1, eps), eps / (4 * d0));
            }
}

TEST(HittingTimes, Geometric) {
    const auto m = gadget(0.1, 0.3, 0.05);
    const auto h = hitting_times(m, {0, 0});
    EXPECT_NEAR(h(0, 1), 10.0, 1e-12);
    EXPECT_NEAR(h(1, 0), 1.0 / 0.3, 1e-12);
    EXPECT_EQ(h(0, 0), 0.0);
    EXPECT_EQ(h(1, 1), 0.0);
}

TEST(HittingTimes, MatchIterationOnRandomMdps) {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
        const auto m = oracle::random_mdp(3, 2, 100 + seed);
        const std::vector<int> mu{0, 1, static_cast<int>(seed % 2)};
        const auto h = hitting_times(m, mu);
        for (int target = 0; target < 3; ++target) {
            const auto ref = oracle::hitting_by_iteration(m, mu, target);
            for (int s = 0; s < 3; ++s) EXPECT_NEAR(h(s, target), ref[s], 1e-9);
        }
    }
}

TEST(HittingTimes, MonteCarloWithinThreeStandardErrors) {
    const auto m = oracle::random_mdp(3, 2, 77);
    const std::vector<int> mu{1, 0, 1};
    const double exact = hitting_times(m, mu)(0, 2);
    PhiloxStream stream(2024, 1);
    const int paths = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int p = 0; p < paths; ++p) {
        int s = 0;
        int steps = 0;
        while (s != 2) {
            const double u = stream.uniform();
            double c = 0.0;
            int next = 2;
            for (int t = 0; t < 3; ++t) {
                c += m.transition(s, mu[s], t);
                if (u < c) {
                    next = t;
                    break;
                }
            }
            s = next;
            ++steps;
        }
        sum += steps;
        sq += static_cast<double>(steps) * steps;
    }
    const double mean = sum / paths;
    const double se = std::sqrt((sq / paths - mean * mean) / paths);
    EXPECT_NEAR(mean, exact, 3 * se);
}

TEST(HittingTimes, UnreachableIsInfinite) {
    const auto m = concat_copies(make_two_state_mdp(2, 0.2, 0.3, 0.1, 0), 4);
    const auto h = hitting_times(m, {0, 0, 0, 0});
    EXPECT_TRUE(std::isinf(h(0, 2)));
    EXPECT_NEAR(h(0, 1), 5.0, 1e-12);
}

TEST(Diameter, TwoState) {
    const auto m = gadget(0.1, 0.3, 0.05);
    EXPECT_NEAR(diameter(m), 10.0, 1e-9);
    const auto mh = min_hitting_times(m);
    EXPECT_NEAR(mh(1, 0), 1.0 / 0.3, 1e-9);
}

TEST(Diameter, MatchesPolicyEnumeration) {
    for (std::uint32_t seed = 0; seed < 8; ++seed) {
        const auto m = oracle::random_mdp(3, 2, 300 + seed);
        double worst = 0.0;
        for (int target = 0; target < 3; ++target) {
            const auto ssp = min_hitting_times_to(m, target);
            for (int s = 0; s < 3; ++s) {
                double best = std::numeric_limits<double>::infinity();
                for (int code = 0; code < 8; ++code) {
                    const std::vector<int> mu{code & 1, (code >> 1) & 1, (code >> 2) & 1};
                    best = std::min(best, oracle::hitting_by_iteration(m, mu, target)[s]);
                }
                EXPECT_NEAR(ssp[s], best, 1e-9);
                worst = std::max(worst, best);
            }
        }
        EXPECT_NEAR(diameter(m), worst, 1e-9);
    }
}

TEST(Diameter, OneStateIsZero) {
    EXPECT_EQ(diameter(to_tabular(make_hard_bandit(2, 0.2, 0.1, 0))), 0.0);
}

TEST(Diameter, DisjointCopiesUndefined) {
    const auto m = concat_copies(make_two_state_mdp(2, 0.2, 0.3, 0.1, 0), 4);
    EXPECT_THROW(diameter(m), UndefinedDiameterError);
}

TEST(OneWayDiameter, TwoState) {
    const auto m = gadget(0.1, 0.3, 0.05);
    const auto dow = one_way_diameter(m);
    EXPECT_NEAR(dow.value, 10.0, 1e-9);
    EXPECT_EQ(dow.reference_state, 1);
    EXPECT_LE(dow.value, diameter(m) + 1e-12);
}

TEST(OneWayDiameter, OneStateIsZero) {
    EXPECT_EQ(one_way_diameter(to_tabular(make_hard_bandit(2, 0.2, 0.1, 0))).value, 0.0);
}

TEST(OneWayDiameter, NeverExceedsDiameter) {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
        const auto m = oracle::random_mdp(2 + seed % 3, 3, 500 + seed);
        EXPECT_LE(one_way_diameter(m).value, diameter(m) + 1e-12);
    }
}

TEST(Bias, TwoStateDifference) {
    const auto h = bias(gadget(0.2, 0.2, 0.0), {0, 0});
    EXPECT_NEAR(h[1] - h[0], 2.5, 1e-12);
}

TEST(Bias, ConstantRewardHasFlatBias) {
    const TabularMdp m(2, 1, {0.3, 0.7, 0.6, 0.4}, {0.4, 0.4});
    const auto h = bias(m, {0, 0});
    EXPECT_NEAR(h[1] - h[0], 0.0, 1e-12);
}

TEST(Bias, SatisfiesPoissonEquation) {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
        const auto m = oracle::random_mdp(3, 2, 700 + seed);
        const std::vector<int> mu{1, 0, 1};
        const auto g = average_reward(m, mu)[0];
        const auto h = bias(m, mu);
        for (int s = 0; s < 3; ++s) {
            double rhs = m.reward(s, mu[s]);
            for (int t = 0; t < 3; ++t) rhs += m.transition(s, mu[s], t) * h[t];
            EXPECT_NEAR(g + h[s], rhs, 1e-10);
        }
    }
}

TEST(Bias, OptimalBiasPicksHighState) {
    for (double d0 : {0.05, 0.2, 0.7})
        for (double d1 : {0.1, 0.4})
            EXPECT_EQ(one_way_diameter(gadget(d0, d1, d1 / 2)).reference_state, 1);
}

TEST(OptimalPolicy, GadgetPlaysStarred) {
    const auto opt = optimal_average_reward_policy(gadget(0.2, 0.2, 0.1));
    EXPECT_EQ(opt.policy[1], 1);
    EXPECT_NEAR(opt.gain, theta1_star(0.2, 0.2, 0.1), 1e-12);
}

TEST(OptimalPolicy, MatchesEnumeration) {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
        const auto m = oracle::random_mdp(3, 2, 900 + seed);
        double best = -1.0;
        for (int code = 0; code < 8; ++code)
            best = std::max(best, oracle::gain_by_power(m, {code & 1, (code >> 1) & 1, (code >> 2) & 1}));
        EXPECT_NEAR(optimal_average_reward_policy(m).gain, best, 1e-10);
    }
}

TEST(Analyze, ReportFields) {
    const auto r = analyze(gadget(0.1, 0.1, 0.01));
    ASSERT_TRUE(r.one_way_diameter);
    ASSERT_TRUE(r.diameter);
    EXPECT_NEAR(*r.one_way_diameter, 10.0, 1e-9);
    EXPECT_EQ(r.reference_state, 1);
    const auto multi = concat_copies(make_two_state_mdp(2, 0.2, 0.3, 0.1, 0), 4);
    EXPECT_THROW(analyze(multi, {{0, 0, 0, 0}}), NonUnichainError);
    EXPECT_THROW(diameter(multi), UndefinedDiameterError);
}

TEST(BackwardInduction, OnePeriod) {
    const auto m = oracle::random_mdp(3, 3, 5);
    const auto v = backward_induction(finite_horizon(m, 1, {1.0, 0.0, 0.0}));
    for (int s = 0; s < 3; ++s) {
        double best = 0.0;
        for (int a = 0; a < 3; ++a) best = std::max(best, m.reward(s, a));
        EXPECT_EQ(v.v_at(0, s), best);
    }
}

TEST(BackwardInduction, HandValue) {
    const auto fh = finite_horizon(gadget(0.2, 0.2, 0.1), 2, {1.0, 0.0});
    const auto v = backward_induction(fh);
    EXPECT_NEAR(v.v_at(0, 1), 1.9, 1e-12);
    EXPECT_EQ(v.action_at(0, 1), 1);
}

TEST(BackwardInduction, MatchesExhaustivePolicyEnumeration) {
    for (int S = 1; S <= 3; ++S)
        for (int A = 1; A <= 3; ++A)
            for (int H = 1; H <= 4; ++H) {
                const auto m = oracle::random_mdp(S, A, static_cast<std::uint32_t>(S * 100 + A * 10 + H));
                std::vector<double> rho(static_cast<std::size_t>(S), 1.0 / S);
                const auto fh = finite_horizon(m, H, rho);
                const auto v = backward_induction(fh);
                const auto ref = oracle::brute_force_finite_horizon(m, H);
                for (int s = 0; s < S; ++s) EXPECT_NEAR(v.v_at(0, s), ref[s], 1e-12);
                const auto greedy = evaluate_finite_horizon_policy(fh, v.policy);
                for (int s = 0; s < S; ++s) {
                    EXPECT_NEAR(greedy[s], v.v_at(0, s), 1e-12);
                    EXPECT_NEAR(oracle::forward_value(m, H, v.policy, s), v.v_at(0, s), 1e-12);
                }
            }
}

TEST(BackwardInduction, MonotoneInRemainingPeriods) {
    const auto m = oracle::random_mdp(3, 2, 31);
    const auto v = backward_induction(finite_horizon(m, 4, {1.0, 0.0, 0.0}));
    for (int h = 0; h + 1 < 4; ++h)
        for (int s = 0; s < 3; ++s) EXPECT_GE(v.v_at(h, s), v.v_at(h + 1, s));
}
