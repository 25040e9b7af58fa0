#pragma once

// Exact expectations over every (action, reward) path of a bandit run, for
// tiny horizons. The informed law uses the true means; the uninformed law
// replaces the starred arm's mean by the base mean. Both are tracked along
// the same path tree.

#include "regret_lab/agents.hpp"
#include "regret_lab/info_bounds.hpp"
#include "regret_lab/instance.hpp"

#include <cstdint>

namespace regret_lab {

inline constexpr int kMaxEnumerationArms = 3;
inline constexpr std::int64_t kMaxEnumerationHorizon = 10;
inline constexpr std::int64_t kMaxEnumerationLeaves = 20'000'000;

struct EnumerationResult {
    /// Expected regret against the true means, actions under each law.
    double informed_regret = 0.0;
    double uninformed_regret = 0.0;
    /// E[n_T(a*)] and E[n~_T(a*)].
    double informed_star_pulls = 0.0;
    double uninformed_star_pulls = 0.0;
    /// KL(uninformed || informed) over full (action, reward) histories.
    KlValue history_kl;
    /// KL(uninformed || informed) over reward sequences alone.
    KlValue reward_sequence_kl;
    std::int64_t leaves = 0;
};

/// Requires an agent exposing action_probabilities for S = 1. Throws
/// EnumerationTooLarge when A > 3, T > 10 or the tree exceeds the leaf cap.
EnumerationResult enumerate_bandit(const Agent& agent, const BanditInstance& bandit, std::int64_t T);

/// Exact E[sum_t (max mean - mean(a_t))] for `agent` on `bandit`.
double exhaustive_expected_regret(const Agent& agent, const BanditInstance& bandit, std::int64_t T);

/// Uninformed regret against the true means, averaged over the A starred
/// positions of the hard bandit (delta, eps).
double exhaustive_uninformed_regret(const Agent& agent, int A, double delta, double eps, std::int64_t T);

struct TrajectoryKlReport {
    /// Exact KL(uninformed || informed), averaged over starred positions
    /// when the report covers all of them.
    KlValue kl;
    KlValue reward_sequence_kl;
    /// (T / A) kl(delta, delta + eps).
    KlValue budget;
    /// E[n~_T(a*)] kl(delta, delta + eps), in nats.
    double star_weighted = 0.0;
    /// (T - E[n~_T(a*)]) kl(delta, delta + eps), in nats.
    double nonstar_weighted = 0.0;
    double informed_fraction = 0.0;
    double uninformed_fraction = 0.0;
    /// sqrt(kl / 2).
    double pinsker_rhs = 0.0;
    bool within_budget = false;
    bool pinsker_holds = false;
    /// Starred positions where the per-position Pinsker check fails.
    int pinsker_violations = 0;
};

/// Single starred position.
TrajectoryKlReport trajectory_kl_exact(const Agent& agent, double delta, double eps, int A,
                                       std::int64_t T, int starred);

/// Averaged over all A starred positions.
TrajectoryKlReport trajectory_kl_exact(const Agent& agent, double delta, double eps, int A,
                                       std::int64_t T);

} // namespace regret_lab
