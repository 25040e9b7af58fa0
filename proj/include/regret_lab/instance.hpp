#pragma once

// Hard bandit / MDP instances and the general tabular MDP they reduce to.
//
// Indices are zero-based throughout: arm 0..A-1, state 0..S-1.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace regret_lab {

/// Bernoulli bandit where every arm has mean `base` except `starred_arm`,
/// which has mean `base + gap`.
struct BanditInstance {
    int num_arms = 0;
    std::vector<double> means;
    int starred_arm = 0;
    double base = 0.0;
    double gap = 0.0;

    double best_mean() const;
    bool operator==(const BanditInstance&) const = default;
};

/// The two-state gadget. State 0 pays 0, state 1 pays 1 (deterministic).
/// From state 0 every action moves to state 1 with probability delta0.
/// From state 1 every action returns to state 0 with probability delta1,
/// except the starred action, which returns with probability delta1 - gap.
struct TwoStateMdpInstance {
    int num_actions = 0;
    double delta0 = 0.0;
    double delta1 = 0.0;
    double gap = 0.0;
    int starred_arm = 0;

    bool operator==(const TwoStateMdpInstance&) const = default;
};

/// Dense tabular MDP with a row-stochastic S x A x S transition tensor and an
/// S x A table of mean rewards in [0, 1]. Validated on construction.
class TabularMdp {
public:
    static constexpr double kRowSumTolerance = 1e-12;

    TabularMdp() = default;
    /// `transitions` is laid out as [s][a][s'], `rewards` as [s][a].
    TabularMdp(int num_states, int num_actions, std::vector<double> transitions,
               std::vector<double> rewards);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    double transition(int s, int a, int next) const {
        return transitions_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + next];
    }
    std::span<const double> row(int s, int a) const {
        return {transitions_.data() + (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_,
                static_cast<std::size_t>(num_states_)};
    }
    double reward(int s, int a) const {
        return rewards_[static_cast<std::size_t>(s) * num_actions_ + a];
    }

    const std::vector<double>& transitions() const { return transitions_; }
    const std::vector<double>& rewards() const { return rewards_; }

    bool operator==(const TabularMdp&) const = default;

private:
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> transitions_;
    std::vector<double> rewards_;
};

/// Episodic MDP: every `horizon` steps the state is redrawn from
/// `initial_distribution`.
struct FiniteHorizonMdp {
    TabularMdp base;
    int horizon = 0;
    std::vector<double> initial_distribution;

    /// Time-expanded MDP with S*H states; state (s, h) has index h*S + s for
    /// h = 0..H-1. Within an episode h advances deterministically; from the
    /// last period the next state is drawn from the initial distribution and
    /// the base transition is discarded.
    TabularMdp expand() const;

    int expanded_index(int s, int h) const { return h * base.num_states() + s; }

    bool operator==(const FiniteHorizonMdp&) const = default;
};

using Instance = std::variant<BanditInstance, TwoStateMdpInstance, TabularMdp, FiniteHorizonMdp>;

BanditInstance make_hard_bandit(int num_arms, double delta, double eps, int starred);

TwoStateMdpInstance make_two_state_mdp(int num_actions, double delta0, double delta1, double eps,
                                       int starred);

TabularMdp to_tabular(const BanditInstance& bandit);
TabularMdp to_tabular(const TwoStateMdpInstance& gadget);
TabularMdp to_tabular(const Instance& instance);

/// Block-diagonal concatenation of ceil(S/2) disjoint copies of the gadget.
/// Copy k occupies states 2k (low) and 2k+1 (high) and uses
/// `starred_per_copy[k]` as its starred action.
TabularMdp concat_copies(const TwoStateMdpInstance& gadget, int num_states,
                         std::span<const int> starred_per_copy);
/// Every copy keeps the gadget's own starred action.
TabularMdp concat_copies(const TwoStateMdpInstance& gadget, int num_states);
/// Starred actions drawn independently and uniformly per copy from `seed`.
TabularMdp concat_copies(const TwoStateMdpInstance& gadget, int num_states, std::uint64_t seed);

/// Starred actions concat_copies(gadget, S, seed) would use.
std::vector<int> draw_starred_per_copy(int num_copies, int num_actions, std::uint64_t seed);

constexpr int num_copies_for(int num_states) { return (num_states + 1) / 2; }

FiniteHorizonMdp finite_horizon(const TabularMdp& mdp, int horizon, std::vector<double> rho);

std::string instance_kind(const Instance& instance);

} // namespace regret_lab
