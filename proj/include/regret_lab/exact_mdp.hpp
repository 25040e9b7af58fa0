#pragma once

// Exact linear-algebraic analysis of tabular MDPs: gain, stationary
// distribution, bias, hitting times, diameter, one-way diameter and
// finite-horizon backward induction.

#include "regret_lab/instance.hpp"

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace regret_lab {

/// Action per state.
using DeterministicPolicy = std::vector<int>;

/// Residual bound every linear solve must meet.
inline constexpr double kSolveResidualTolerance = 1e-9;

Eigen::MatrixXd policy_transition_matrix(const TabularMdp& mdp, const DeterministicPolicy& mu);
Eigen::VectorXd policy_reward_vector(const TabularMdp& mdp, const DeterministicPolicy& mu);

/// Closed communicating classes of the chain P_mu, each sorted ascending and
/// ordered by their smallest state.
std::vector<std::vector<int>> closed_classes(const TabularMdp& mdp, const DeterministicPolicy& mu);

/// Throws NonUnichainError unless the chain under mu has exactly one closed class.
void require_unichain(const TabularMdp& mdp, const DeterministicPolicy& mu);

std::vector<double> stationary_distribution(const TabularMdp& mdp, const DeterministicPolicy& mu);

/// Long-run average reward per start state; equal across states for a
/// unichain policy.
std::vector<double> average_reward(const TabularMdp& mdp, const DeterministicPolicy& mu);

/// Relative values h with lambda + h(s) = r(s, mu(s)) + sum P h, pinned to
/// h = 0 at the lowest-index recurrent state.
std::vector<double> bias(const TabularMdp& mdp, const DeterministicPolicy& mu);

/// delta0 / (delta0 + delta1): gain of the gadget under any non-starred action.
double theta1(double delta0, double delta1);
/// delta0 / (delta0 + delta1 - eps): gain of the gadget under the starred action.
double theta1_star(double delta0, double delta1, double eps);
/// theta1_star - theta1 in closed form.
double optimal_gap(double delta0, double delta1, double eps);

/// Expected steps T_mu(s, s') to first reach s' from s (0 on the diagonal,
/// +infinity when s' is not reached almost surely).
Eigen::MatrixXd hitting_times(const TabularMdp& mdp, const DeterministicPolicy& mu);

struct SspOptions {
    double tolerance = 1e-10;
    long max_iterations = 1'000'000;
};

/// min over policies of the expected time to reach `target`, per start state,
/// via stochastic-shortest-path value iteration. States that cannot reach the
/// target almost surely under any policy get +infinity.
std::vector<double> min_hitting_times_to(const TabularMdp& mdp, int target,
                                         const SspOptions& options = {});

/// All-pairs version; entry (s, s') = min_mu T_mu(s, s').
Eigen::MatrixXd min_hitting_times(const TabularMdp& mdp, const SspOptions& options = {});

/// max over pairs of min_mu T_mu(s, s'). Throws UndefinedDiameterError when
/// the MDP is not communicating.
double diameter(const TabularMdp& mdp, const SspOptions& options = {});

struct OptimalAverageReward {
    DeterministicPolicy policy;
    double gain = 0.0;
    std::vector<double> bias;
};

/// Policy iteration over deterministic policies; every visited policy must be
/// unichain. Improvement keeps the incumbent action unless another action is
/// better by more than 1e-12, else picks the lowest index.
OptimalAverageReward optimal_average_reward_policy(const TabularMdp& mdp);

struct OneWayDiameter {
    double value = 0.0;
    int reference_state = 0;
};

/// Reference state = argmax of the optimal bias (ties to lowest index);
/// value = max_s min_mu T_mu(s, reference).
OneWayDiameter one_way_diameter(const TabularMdp& mdp, const SspOptions& options = {});

struct MdpReport {
    DeterministicPolicy policy;
    std::vector<double> lambda;
    std::vector<double> stationary;
    std::vector<double> bias;
    Eigen::MatrixXd hitting_times;
    std::optional<double> diameter;
    std::optional<double> one_way_diameter;
    int reference_state = 0;
};

/// Full report for `mu`, or for the optimal average-reward policy when no
/// policy is given. diameter / one_way_diameter are empty when undefined.
MdpReport analyze(const TabularMdp& mdp, std::optional<DeterministicPolicy> mu = std::nullopt);

/// Q and V tables indexed [h][s][a] and [h][s], h = 0..H-1.
struct FiniteHorizonValues {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> q;
    std::vector<double> v;
    /// Greedy optimal action per (h, s), lowest index on ties.
    std::vector<int> policy;

    double q_at(int h, int s, int a) const {
        return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double v_at(int h, int s) const { return v[static_cast<std::size_t>(h) * num_states + s]; }
    int action_at(int h, int s) const {
        return policy[static_cast<std::size_t>(h) * num_states + s];
    }
};

FiniteHorizonValues backward_induction(const FiniteHorizonMdp& fh);

/// V_{mu,h}(s) for a fixed (state, period) policy; `action_of[h*S + s]`.
std::vector<double> evaluate_finite_horizon_policy(const FiniteHorizonMdp& fh,
                                                   const std::vector<int>& action_of);

} // namespace regret_lab
