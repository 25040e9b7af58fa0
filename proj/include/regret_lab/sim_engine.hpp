#pragma once

// Trajectory simulation, the informed/uninformed coupling, Monte Carlo regret
// curves, and closed-form uninformed regret.

#include "regret_lab/agents.hpp"
#include "regret_lab/instance.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace regret_lab {

enum class RegretMode { expected, realized };

std::string to_string(RegretMode mode);
RegretMode parse_regret_mode(const std::string& text);

/// A simulatable environment: the true MDP plus, for the hard instances, the
/// uninformed MDP in which the starred action behaves like the others.
struct Environment {
    std::string id;
    TabularMdp mdp;
    std::optional<TabularMdp> uninformed;
    int starred_arm = -1;
    /// Optimal long-run average reward (lambda*).
    double optimal_gain = 0.0;
    int start_state = 0;
};

Environment make_environment(const BanditInstance& bandit);
/// Gadget simulations start in the low-reward state 0 by default.
Environment make_environment(const TwoStateMdpInstance& gadget, int start_state = 0);
/// General MDPs: lambda* from the optimal average-reward policy.
Environment make_environment(const TabularMdp& mdp, int start_state = 0);
Environment make_environment(const Instance& instance, int start_state = 0);

/// One environment per starred position 0..A-1 (bandit or gadget family).
std::vector<Environment> starred_family(const Instance& instance, int start_state = 0);

struct Trajectory {
    std::vector<int> states;
    std::vector<int> actions;
    std::vector<double> rewards;
    std::vector<std::int64_t> pull_counts;
    std::uint64_t seed = 0;
    std::uint64_t run = 0;
    std::string instance_id;

    bool operator==(const Trajectory&) const = default;
};

struct CoupledRun {
    Trajectory informed;
    Trajectory uninformed;
    std::uint64_t shared_seed = 0;
};

/// Runs `prototype` (cloned and reset) for T steps. Uniforms are keyed by
/// (seed, run, t, channel): agent, reward and transition channels are
/// independent. Rewards are 1{u_reward < rbar(s, a)}; next states are drawn
/// by inverse CDF of the transition row with u_transition.
Trajectory simulate(const Agent& prototype, const Environment& env, std::int64_t T,
                    std::uint64_t seed, std::uint64_t run = 0);

/// Same agent logic on the true and the uninformed environment, consuming
/// identical uniforms at every t.
CoupledRun coupled_run(const Agent& prototype, const Environment& env, std::int64_t T,
                       std::uint64_t seed, std::uint64_t run = 0);

/// Sum over t of (lambda* - rbar(s_t, a_t)) or (lambda* - r_t).
double trajectory_regret(const Trajectory& trajectory, const Environment& env, RegretMode mode);

struct BatchOptions {
    std::int64_t horizon = 0;
    std::int64_t runs = 0;
    std::uint64_t seed = 0;
    RegretMode mode = RegretMode::expected;
    /// Checkpoints in 1..horizon; empty means {horizon}.
    std::vector<std::int64_t> t_grid;
    bool coupled = false;
    /// 0 = use default_worker_count().
    int workers = 0;
};

/// Per-run values at each checkpoint of the grid.
struct RunRecord {
    std::vector<double> cum_regret;
    std::vector<std::int64_t> n_star;
    /// Empty unless the batch was coupled.
    std::vector<std::int64_t> n_star_uninformed;
};

/// Runs `runs` independent simulations; run r uses environments[r % size],
/// so a family from starred_family() averages the starred position evenly
/// when runs is a multiple of A. Results are ordered by run index and do not
/// depend on the worker count.
std::vector<RunRecord> simulate_batch(const AgentSpec& agent, std::span<const Environment> environments,
                                      const BatchOptions& options);

struct RegretCurve {
    std::vector<std::int64_t> t_grid;
    std::vector<double> mean;
    std::vector<double> std_dev;
    /// 1.96 * sample std / sqrt(runs).
    std::vector<double> ci_half_width;
    std::int64_t runs = 0;
    RegretMode mode = RegretMode::expected;
    std::string agent;
};

RegretCurve summarize(const std::vector<RunRecord>& records, const std::vector<std::int64_t>& t_grid,
                      RegretMode mode, std::string agent_name = {});

RegretCurve expected_regret_mc(const AgentSpec& agent, std::span<const Environment> environments,
                               const BatchOptions& options);

struct SymmetryReport {
    /// Mean over all runs of n~_T(a*) / T.
    double mean_fraction = 0.0;
    double standard_error = 0.0;
    /// Mean fraction for each starred position.
    std::vector<double> per_position;
    std::int64_t runs = 0;
};

/// Coupled runs with a* cycling over all A positions; reports the uninformed
/// pull fraction of the starred arm (1/A in expectation). runs % A == 0.
SymmetryReport symmetry_average(const AgentSpec& agent, int A, double delta, double eps,
                                std::int64_t T, std::int64_t runs, std::uint64_t seed,
                                int workers = 0);

struct ClosedFormRegret {
    double value = 0.0;
    /// True when the value is only a lower bound (gadget), false when it is
    /// the exact expectation (bandit).
    bool lower_bound_only = false;
};

/// Bandit: eps T (1 - 1/A). Gadget: theta1 (eps / (4 delta0)) T (1 - 1/A).
ClosedFormRegret uninformed_regret_closed_form(const Instance& instance, std::int64_t T);

/// Worker count from REGRET_LAB_THREADS, else hardware concurrency (>= 1).
int default_worker_count();

} // namespace regret_lab
