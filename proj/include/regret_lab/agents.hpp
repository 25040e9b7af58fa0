#pragma once

// Learning agents. An agent maps its history to a distribution over actions
// and realizes a draw from it with a uniform supplied by the simulator;
// agents never own random generators.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace regret_lab {

/// One interaction step. `next_state` is the state observed after acting.
struct Observation {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
};

using History = std::vector<Observation>;

/// Sufficient statistics shared by every agent; a pure fold over the history.
class CountStats {
public:
    CountStats() = default;
    CountStats(int num_states, int num_actions);

    void add(const Observation& obs);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    /// Steps observed so far.
    std::int64_t steps() const { return steps_; }
    std::int64_t visits(int s, int a) const { return visits_[index(s, a)]; }
    double reward_sum(int s, int a) const { return reward_sums_[index(s, a)]; }
    std::int64_t transitions(int s, int a, int next) const {
        return transition_counts_[index(s, a) * num_states_ + next];
    }
    /// Empirical mean reward, or `fallback` when (s, a) is unvisited.
    double mean_reward(int s, int a, double fallback) const;

    bool operator==(const CountStats&) const = default;

private:
    std::size_t index(int s, int a) const {
        return static_cast<std::size_t>(s) * num_actions_ + a;
    }

    int num_states_ = 0;
    int num_actions_ = 0;
    std::int64_t steps_ = 0;
    std::vector<std::int64_t> visits_;
    std::vector<double> reward_sums_;
    std::vector<std::int64_t> transition_counts_;
};

class Agent {
public:
    Agent(int num_states, int num_actions) : stats_(num_states, num_actions) {}
    virtual ~Agent() = default;

    virtual std::string name() const = 0;
    virtual std::unique_ptr<Agent> clone() const = 0;

    /// Selects an action in `state` given the uniform `u` in [0, 1).
    /// Identical (history, draws) always give identical actions.
    virtual int act(int state, double u) = 0;

    /// Exact law of act(state, U) for U ~ Uniform[0, 1), when the agent can
    /// provide it in closed form (or by exact quadrature). Empty otherwise.
    virtual std::optional<std::vector<double>> action_probabilities(int state) const = 0;

    /// True when action_probabilities is always a point mass.
    virtual bool deterministic() const { return false; }

    void update(const Observation& obs);

    /// Clears all statistics back to the prior.
    void reset();

    /// reset() followed by update() over every step of `history`.
    void rebuild(const History& history);

    const CountStats& stats() const { return stats_; }
    int num_states() const { return stats_.num_states(); }
    int num_actions() const { return stats_.num_actions(); }

protected:
    virtual void on_update(const Observation& obs) = 0;
    virtual void on_reset() = 0;

    CountStats stats_;
};

/// Picks each action with probability 1/A: action = floor(u A).
class UniformRandomAgent final : public Agent {
public:
    UniformRandomAgent(int num_states, int num_actions) : Agent(num_states, num_actions) {}
    std::string name() const override { return "uniform"; }
    std::unique_ptr<Agent> clone() const override;
    int act(int state, double u) override;
    std::optional<std::vector<double>> action_probabilities(int state) const override;

protected:
    void on_update(const Observation&) override {}
    void on_reset() override {}
};

enum class ExplorationDecay { constant, inverse, inverse_sqrt };

/// With probability eps_t explores uniformly, otherwise plays the action
/// with the highest empirical mean reward in the current state (unvisited
/// actions count as mean 1; ties to the lowest index).
/// eps_t = eps, eps / t or eps / sqrt(t), clipped to [0, 1].
class EpsilonGreedyAgent final : public Agent {
public:
    EpsilonGreedyAgent(int num_states, int num_actions, double explore,
                       ExplorationDecay decay = ExplorationDecay::constant);
    std::string name() const override { return "egreedy"; }
    std::unique_ptr<Agent> clone() const override;
    int act(int state, double u) override;
    std::optional<std::vector<double>> action_probabilities(int state) const override;
    bool deterministic() const override { return explore_ == 0.0; }

    double exploration_rate() const;
    int greedy_action(int state) const;

protected:
    void on_update(const Observation&) override {}
    void on_reset() override {}

private:
    double explore_;
    ExplorationDecay decay_;
};

/// UCB1 on a single-state problem: pulls each unpulled arm once (lowest
/// index first), then maximizes mean + c sqrt(ln t / n).
class Ucb1Agent final : public Agent {
public:
    Ucb1Agent(int num_states, int num_actions, double c);
    std::string name() const override { return "ucb1"; }
    std::unique_ptr<Agent> clone() const override;
    int act(int state, double u) override;
    std::optional<std::vector<double>> action_probabilities(int state) const override;
    bool deterministic() const override { return true; }

    int choose() const;
    double index(int arm) const;

protected:
    void on_update(const Observation&) override {}
    void on_reset() override {}

private:
    double c_;
};

struct OptimisticConfig {
    double confidence = 2.0;       // c1 in the confidence radii
    double tolerance = 1e-6;       // extended value iteration span stop
    int max_iterations = 100'000;
};

/// Optimistic model-based agent for average-reward MDPs: L1 confidence
/// balls of radius sqrt(c1 ln t / n) around the empirical transition rows,
/// reward bonus sqrt(c1 ln t / (2 n)), extended value iteration, and an
/// episode that ends once some (s, a) doubles its visit count.
class OptimisticModelAgent final : public Agent {
public:
    OptimisticModelAgent(int num_states, int num_actions, OptimisticConfig config = {});
    std::string name() const override { return "optimistic"; }
    std::unique_ptr<Agent> clone() const override;
    int act(int state, double u) override;
    std::optional<std::vector<double>> action_probabilities(int state) const override;
    bool deterministic() const override { return true; }

    const std::vector<int>& policy() const { return policy_; }
    int episodes() const { return episodes_; }

protected:
    void on_update(const Observation& obs) override;
    void on_reset() override;

private:
    void plan();

    OptimisticConfig config_;
    std::vector<int> policy_;
    std::vector<std::int64_t> episode_start_visits_;
    std::vector<std::int64_t> episode_visits_;
    int episodes_ = 0;
};

struct PosteriorConfig {
    double reward_alpha = 1.0;     // Beta prior on Bernoulli rewards
    double reward_beta = 1.0;
    double transition_prior = 1.0; // symmetric Dirichlet on transition rows
    double tolerance = 1e-6;
    int max_iterations = 100'000;
};

/// Posterior sampling. With one state it is Thompson sampling on Beta
/// posteriors, resampled every step. With several states it samples a
/// Dirichlet/Beta model at the start of each doubling episode and follows
/// that model's average-reward optimal policy.
class PosteriorSamplingAgent final : public Agent {
public:
    PosteriorSamplingAgent(int num_states, int num_actions, PosteriorConfig config = {});
    std::string name() const override { return "psrl"; }
    std::unique_ptr<Agent> clone() const override;
    int act(int state, double u) override;
    std::optional<std::vector<double>> action_probabilities(int state) const override;

    struct BetaParams {
        double alpha;
        double beta;
        bool operator==(const BetaParams&) const = default;
    };
    BetaParams reward_posterior(int s, int a) const;

protected:
    void on_update(const Observation& obs) override;
    void on_reset() override;

private:
    void resample(double u);

    PosteriorConfig config_;
    std::vector<int> policy_;
    std::vector<std::int64_t> episode_start_visits_;
    std::vector<std::int64_t> episode_visits_;
    bool needs_sample_ = true;
};

/// Agent kind plus parameters, as given on the command line:
///   "uniform", "egreedy:explore=0.1,decay=constant", "ucb1:c=1.41",
///   "optimistic:c1=2", "psrl".
struct AgentSpec {
    std::string kind;
    std::map<std::string, std::string> params;

    std::string to_string() const;
};

AgentSpec parse_agent_spec(std::string_view text);

/// Throws ConfigError on unknown kinds or parameters, UnsupportedInstance
/// when the agent cannot run on an MDP of this shape (ucb1 with S > 1).
std::unique_ptr<Agent> make_agent(const AgentSpec& spec, int num_states, int num_actions);

/// The five roster kinds with default parameters.
std::vector<AgentSpec> default_roster();

/// Roster members usable on multi-state MDPs.
std::vector<AgentSpec> mdp_roster();

/// Probability that each independent Beta(alpha_a, beta_a) is the largest,
/// by Gauss-Legendre quadrature.
std::vector<double> beta_argmax_probabilities(const std::vector<PosteriorSamplingAgent::BetaParams>& params);

/// Inverse-CDF draw: smallest index whose cumulative mass exceeds u.
int sample_index(const std::vector<double>& probabilities, double u);

} // namespace regret_lab
