#include "regret_lab/sim_engine.hpp"

#include "regret_lab/errors.hpp"
#include "regret_lab/exact_mdp.hpp"
#include "regret_lab/philox.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace regret_lab {

std::string to_string(RegretMode mode) {
    return mode == RegretMode::expected ? "expected" : "realized";
}

RegretMode parse_regret_mode(const std::string& text) {
    if (text == "expected") return RegretMode::expected;
    if (text == "realized") return RegretMode::realized;
    throw ConfigError("mode: expected 'expected' or 'realized', got '" + text + "'");
}

// ---------------------------------------------------------------------------
// Environments

Environment make_environment(const BanditInstance& bandit) {
    Environment env;
    env.id = "bandit-A" + std::to_string(bandit.num_arms) + "-star" + std::to_string(bandit.starred_arm);
    env.mdp = to_tabular(bandit);
    BanditInstance blind = bandit;
    blind.means[static_cast<std::size_t>(bandit.starred_arm)] = bandit.base;
    env.uninformed = to_tabular(blind);
    env.starred_arm = bandit.starred_arm;
    env.optimal_gain = bandit.best_mean();
    env.start_state = 0;
    return env;
}

Environment make_environment(const TwoStateMdpInstance& gadget, int start_state) {
    Environment env;
    env.id = "two_state-A" + std::to_string(gadget.num_actions) + "-star" +
             std::to_string(gadget.starred_arm);
    env.mdp = to_tabular(gadget);
    TwoStateMdpInstance blind = gadget;
    blind.gap = 0.0;
    env.uninformed = to_tabular(blind);
    env.starred_arm = gadget.starred_arm;
    env.optimal_gain = optimal_average_reward_policy(env.mdp).gain;
    if (start_state < 0 || start_state > 1) throw ParameterError("start state must be 0 or 1");
    env.start_state = start_state;
    return env;
}

Environment make_environment(const TabularMdp& mdp, int start_state) {
    Environment env;
    env.id = "tabular-S" + std::to_string(mdp.num_states()) + "-A" + std::to_string(mdp.num_actions());
    env.mdp = mdp;
    env.optimal_gain = optimal_average_reward_policy(mdp).gain;
    if (start_state < 0 || start_state >= mdp.num_states())
        throw ParameterError("start state out of range");
    env.start_state = start_state;
    return env;
}

Environment make_environment(const Instance& instance, int start_state) {
    return std::visit(
        [&](const auto& inst) -> Environment {
            using T = std::decay_t<decltype(inst)>;
            if constexpr (std::is_same_v<T, BanditInstance>)
                return make_environment(inst);
            else if constexpr (std::is_same_v<T, TwoStateMdpInstance>)
                return make_environment(inst, start_state);
            else if constexpr (std::is_same_v<T, FiniteHorizonMdp>)
                return make_environment(inst.expand(), start_state);
            else
                return make_environment(inst, start_state);
        },
        instance);
}

std::vector<Environment> starred_family(const Instance& instance, int start_state) {
    std::vector<Environment> out;
    if (const auto* b = std::get_if<BanditInstance>(&instance)) {
        for (int a = 0; a < b->num_arms; ++a)
            out.push_back(make_environment(make_hard_bandit(b->num_arms, b->base, b->gap, a)));
    } else if (const auto* g = std::get_if<TwoStateMdpInstance>(&instance)) {
        for (int a = 0; a < g->num_actions; ++a)
            out.push_back(make_environment(
                make_two_state_mdp(g->num_actions, g->delta0, g->delta1, g->gap, a), start_state));
    } else {
        throw UnsupportedInstance("starred_family needs a hard bandit or two-state instance");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stepping

namespace {

int draw_next_state(const TabularMdp& mdp, int s, int a, double u) {
    const int S = mdp.num_states();
    if (S == 1) return 0;
    const auto row = mdp.row(s, a);
    double cumulative = 0.0;
    int last_positive = 0;
    for (int t = 0; t < S; ++t) {
        if (row[t] <= 0.0) continue;
        last_positive = t;
        cumulative += row[t];
        if (u < cumulative) return t;
    }
    return last_positive;
}

/// Steps `agent` through `mdp` for T steps; on_step(t, s, a, r) is called
/// before the agent observes the outcome.
template <typename OnStep>
void run_loop(Agent& agent, const TabularMdp& mdp, int start_state, std::int64_t T,
              const KeyedUniforms& draws, std::uint64_t run, OnStep&& on_step) {
    int s = start_state;
    for (std::int64_t t = 1; t <= T; ++t) {
        const auto tt = static_cast<std::uint64_t>(t);
        const int a = agent.act(s, draws.uniform(run, tt, Channel::agent));
        const double r = draws.uniform(run, tt, Channel::reward) < mdp.reward(s, a) ? 1.0 : 0.0;
        const int next =
            mdp.num_states() == 1 ? 0 : draw_next_state(mdp, s, a, draws.uniform(run, tt, Channel::transition));
        on_step(t, s, a, r);
        agent.update({s, a, r, next});
        s = next;
    }
}

Trajectory record_trajectory(const Agent& prototype, const Environment& env, const TabularMdp& mdp,
                             std::int64_t T, std::uint64_t seed, std::uint64_t run) {
    if (T < 1) throw ParameterError("T >= 1 required");
    auto agent = prototype.clone();
    agent->reset();
    Trajectory out;
    out.seed = seed;
    out.run = run;
    out.instance_id = env.id;
    out.pull_counts.assign(static_cast<std::size_t>(mdp.num_actions()), 0);
    out.states.reserve(static_cast<std::size_t>(T));
    out.actions.reserve(static_cast<std::size_t>(T));
    out.rewards.reserve(static_cast<std::size_t>(T));
    run_loop(*agent, mdp, env.start_state, T, KeyedUniforms(seed), run,
             [&](std::int64_t, int s, int a, double r) {
                 out.states.push_back(s);
                 out.actions.push_back(a);
                 out.rewards.push_back(r);
                 ++out.pull_counts[static_cast<std::size_t>(a)];
             });
    return out;
}

void check_agent_fits(const Agent& agent, const TabularMdp& mdp) {
    if (agent.num_states() != mdp.num_states() || agent.num_actions() != mdp.num_actions())
        throw ParameterError("agent shape does not match the environment");
}

} // namespace

Trajectory simulate(const Agent& prototype, const Environment& env, std::int64_t T,
                    std::uint64_t seed, std::uint64_t run) {
    check_agent_fits(prototype, env.mdp);
    return record_trajectory(prototype, env, env.mdp, T, seed, run);
}

CoupledRun coupled_run(const Agent& prototype, const Environment& env, std::int64_t T,
                       std::uint64_t seed, std::uint64_t run) {
    if (!env.uninformed) throw UnsupportedInstance("coupling needs a hard bandit or two-state instance");
    check_agent_fits(prototype, env.mdp);
    CoupledRun out;
    out.shared_seed = seed;
    out.informed = record_trajectory(prototype, env, env.mdp, T, seed, run);
    out.uninformed = record_trajectory(prototype, env, *env.uninformed, T, seed, run);
    return out;
}

double trajectory_regret(const Trajectory& trajectory, const Environment& env, RegretMode mode) {
    double total = 0.0;
    for (std::size_t t = 0; t < trajectory.actions.size(); ++t) {
        const double earned = mode == RegretMode::expected
                                  ? env.mdp.reward(trajectory.states[t], trajectory.actions[t])
                                  : trajectory.rewards[t];
        total += env.optimal_gain - earned;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Batches

int default_worker_count() {
    if (const char* env = std::getenv("REGRET_LAB_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::vector<std::int64_t> normalized_grid(const BatchOptions& options) {
    std::vector<std::int64_t> grid = options.t_grid;
    if (grid.empty()) grid.push_back(options.horizon);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.front() < 1 || grid.back() > options.horizon)
        throw ParameterError("t_grid entries must lie in 1..T");
    return grid;
}

RunRecord run_one(Agent& agent, const Environment& env, const BatchOptions& options,
                  const std::vector<std::int64_t>& grid, std::uint64_t run) {
    RunRecord record;
    record.cum_regret.reserve(grid.size());
    record.n_star.reserve(grid.size());
    const KeyedUniforms draws(options.seed);
    {
        agent.reset();
        double regret = 0.0;
        std::int64_t n_star = 0;
        std::size_t next_checkpoint = 0;
        run_loop(agent, env.mdp, env.start_state, options.horizon, draws, run,
                 [&](std::int64_t t, int s, int a, double r) {
                     const double earned =
                         options.mode == RegretMode::expected ? env.mdp.reward(s, a) : r;
                     regret += env.optimal_gain - earned;
                     if (a == env.starred_arm) ++n_star;
                     if (next_checkpoint < grid.size() && t == grid[next_checkpoint]) {
                         record.cum_regret.push_back(regret);
                         record.n_star.push_back(n_star);
                         ++next_checkpoint;
                     }
                 });
    }
    if (options.coupled) {
        if (!env.uninformed)
            throw UnsupportedInstance("coupling needs a hard bandit or two-state instance");
        agent.reset();
        std::int64_t n_star = 0;
        std::size_t next_checkpoint = 0;
        record.n_star_uninformed.reserve(grid.size());
        run_loop(agent, *env.uninformed, env.start_state, options.horizon, draws, run,
                 [&](std::int64_t t, int, int a, double) {
                     if (a == env.starred_arm) ++n_star;
                     if (next_checkpoint < grid.size() && t == grid[next_checkpoint]) {
                         record.n_star_uninformed.push_back(n_star);
                         ++next_checkpoint;
                     }
                 });
    }
    return record;
}

} // namespace

std::vector<RunRecord> simulate_batch(const AgentSpec& agent_spec,
                                      std::span<const Environment> environments,
                                      const BatchOptions& options) {
    if (environments.empty()) throw ParameterError("simulate_batch needs at least one environment");
    if (options.horizon < 1) throw ParameterError("T >= 1 required");
    if (options.runs < 1) throw ParameterError("runs >= 1 required");
    const auto grid = normalized_grid(options);
    const TabularMdp& shape = environments.front().mdp;
    for (const auto& env : environments)
        if (env.mdp.num_states() != shape.num_states() || env.mdp.num_actions() != shape.num_actions())
            throw ParameterError("all environments in a batch must share S and A");
    // Validate the agent spec once on the calling thread.
    (void)make_agent(agent_spec, shape.num_states(), shape.num_actions());

    std::vector<RunRecord> records(static_cast<std::size_t>(options.runs));
    const int workers = static_cast<int>(std::min<std::int64_t>(
        options.runs, options.workers > 0 ? options.workers : default_worker_count()));

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&](int worker) {
        try {
            auto agent = make_agent(agent_spec, shape.num_states(), shape.num_actions());
            for (std::int64_t run = worker; run < options.runs; run += workers) {
                const auto& env = environments[static_cast<std::size_t>(run) % environments.size()];
                records[static_cast<std::size_t>(run)] =
                    run_one(*agent, env, options, grid, static_cast<std::uint64_t>(run));
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
        for (auto& th : threads) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

RegretCurve summarize(const std::vector<RunRecord>& records, const std::vector<std::int64_t>& t_grid,
                      RegretMode mode, std::string agent_name) {
    RegretCurve curve;
    curve.t_grid = t_grid;
    curve.runs = static_cast<std::int64_t>(records.size());
    curve.mode = mode;
    curve.agent = std::move(agent_name);
    const auto n = static_cast<double>(records.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        double sum = 0.0;
        for (const auto& r : records) sum += r.cum_regret[k];
        const double mean = sum / n;
        double sq = 0.0;
        for (const auto& r : records) sq += (r.cum_regret[k] - mean) * (r.cum_regret[k] - mean);
        const double sd = records.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
        curve.mean.push_back(mean);
        curve.std_dev.push_back(sd);
        curve.ci_half_width.push_back(1.96 * sd / std::sqrt(n));
    }
    return curve;
}

RegretCurve expected_regret_mc(const AgentSpec& agent, std::span<const Environment> environments,
                               const BatchOptions& options) {
    if (options.runs < 2) throw ParameterError("expected_regret_mc requires runs >= 2");
    BatchOptions opts = options;
    opts.t_grid = normalized_grid(options);
    const auto records = simulate_batch(agent, environments, opts);
    return summarize(records, opts.t_grid, opts.mode, agent.to_string());
}

SymmetryReport symmetry_average(const AgentSpec& agent, int A, double delta, double eps,
                                std::int64_t T, std::int64_t runs, std::uint64_t seed, int workers) {
    if (runs < A || runs % A != 0) throw ParameterError("symmetry_average requires runs divisible by A");
    const auto family = starred_family(make_hard_bandit(A, delta, eps, 0));
    BatchOptions options;
    options.horizon = T;
    options.runs = runs;
    options.seed = seed;
    options.coupled = true;
    options.workers = workers;
    const auto records = simulate_batch(agent, family, options);

    SymmetryReport report;
    report.runs = runs;
    report.per_position.assign(static_cast<std::size_t>(A), 0.0);
    std::vector<double> fractions;
    fractions.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        const double f = static_cast<double>(records[r].n_star_uninformed.back()) / static_cast<double>(T);
        fractions.push_back(f);
        report.per_position[r % static_cast<std::size_t>(A)] += f;
    }
    const auto n = static_cast<double>(runs);
    for (double& p : report.per_position) p /= n / A;
    double sum = 0.0;
    for (double f : fractions) sum += f;
    report.mean_fraction = sum / n;
    double sq = 0.0;
    for (double f : fractions) sq += (f - report.mean_fraction) * (f - report.mean_fraction);
    report.standard_error = std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
    return report;
}

ClosedFormRegret uninformed_regret_closed_form(const Instance& instance, std::int64_t T) {
    const auto t = static_cast<double>(T);
    if (const auto* b = std::get_if<BanditInstance>(&instance))
        return {b->gap * t * (1.0 - 1.0 / b->num_arms), false};
    if (const auto* g = std::get_if<TwoStateMdpInstance>(&instance))
        return {theta1(g->delta0, g->delta1) * (g->gap / (4.0 * g->delta0)) * t *
                    (1.0 - 1.0 / g->num_actions),
                true};
    throw UnsupportedInstance("closed-form uninformed regret needs a hard bandit or two-state instance");
}

} // namespace regret_lab
