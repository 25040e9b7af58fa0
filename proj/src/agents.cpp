#include "regret_lab/agents.hpp"

#include "regret_lab/errors.hpp"
#include "regret_lab/philox.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace regret_lab {

// ---------------------------------------------------------------------------
// Statistics

CountStats::CountStats(int num_states, int num_actions)
    : num_states_(num_states), num_actions_(num_actions),
      visits_(static_cast<std::size_t>(num_states) * num_actions, 0),
      reward_sums_(static_cast<std::size_t>(num_states) * num_actions, 0.0),
      transition_counts_(static_cast<std::size_t>(num_states) * num_actions * num_states, 0) {
    if (num_states < 1 || num_actions < 1)
        throw ParameterError("agents need at least one state and one action");
}

void CountStats::add(const Observation& obs) {
    if (obs.state < 0 || obs.state >= num_states_ || obs.action < 0 ||
        obs.action >= num_actions_ || obs.next_state < 0 || obs.next_state >= num_states_)
        throw ParameterError("observation index out of range");
    if (!(obs.reward >= 0.0 && obs.reward <= 1.0))
        throw ParameterError("observation reward must lie in [0, 1]");
    const std::size_t i = index(obs.state, obs.action);
    ++steps_;
    ++visits_[i];
    reward_sums_[i] += obs.reward;
    ++transition_counts_[i * num_states_ + obs.next_state];
}

double CountStats::mean_reward(int s, int a, double fallback) const {
    const std::size_t i = index(s, a);
    return visits_[i] == 0 ? fallback : reward_sums_[i] / static_cast<double>(visits_[i]);
}

// ---------------------------------------------------------------------------
// Agent base

void Agent::update(const Observation& obs) {
    stats_.add(obs);
    on_update(obs);
}

void Agent::reset() {
    stats_ = CountStats(stats_.num_states(), stats_.num_actions());
    on_reset();
}

void Agent::rebuild(const History& history) {
    reset();
    for (const auto& obs : history) update(obs);
}

int sample_index(const std::vector<double>& probabilities, double u) {
    double cumulative = 0.0;
    int last_positive = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] <= 0.0) continue;
        last_positive = static_cast<int>(i);
        cumulative += probabilities[i];
        if (u < cumulative) return static_cast<int>(i);
    }
    return last_positive;
}

namespace {

int uniform_index(double u, int n) { return std::min(n - 1, static_cast<int>(u * n)); }

std::vector<double> point_mass(int n, int at) {
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    p[static_cast<std::size_t>(at)] = 1.0;
    return p;
}

/// Average-reward value iteration on the aperiodic transform
/// P' = (P + I) / 2, which has the same optimal policies. `q` evaluates the
/// inner maximization for (s, a) against the current values.
template <typename QFn>
std::vector<int> average_reward_value_iteration(int S, int A, double tolerance, int max_iterations,
                                                QFn&& q) {
    std::vector<double> values(static_cast<std::size_t>(S), 0.0);
    std::vector<double> next(static_cast<std::size_t>(S), 0.0);
    std::vector<int> policy(static_cast<std::size_t>(S), 0);
    for (int it = 0; it < max_iterations; ++it) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                const double v = q(s, a, values);
                if (v > best) {
                    best = v;
                    policy[s] = a;
                }
            }
            next[s] = 0.5 * best + 0.5 * values[s];
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int s = 0; s < S; ++s) {
            const double d = next[s] - values[s];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        // Shift to keep the iterates bounded; spans are unaffected.
        const double shift = next[0];
        for (int s = 0; s < S; ++s) values[s] = next[s] - shift;
        if (hi - lo < tolerance) break;
    }
    return policy;
}

} // namespace

// ---------------------------------------------------------------------------
// UniformRandom

std::unique_ptr<Agent> UniformRandomAgent::clone() const {
    return std::make_unique<UniformRandomAgent>(*this);
}

int UniformRandomAgent::act(int, double u) { return uniform_index(u, num_actions()); }

std::optional<std::vector<double>> UniformRandomAgent::action_probabilities(int) const {
    return std::vector<double>(static_cast<std::size_t>(num_actions()), 1.0 / num_actions());
}

// ---------------------------------------------------------------------------
// EpsilonGreedy

EpsilonGreedyAgent::EpsilonGreedyAgent(int num_states, int num_actions, double explore,
                                       ExplorationDecay decay)
    : Agent(num_states, num_actions), explore_(explore), decay_(decay) {
    if (!(explore >= 0.0)) throw ParameterError("egreedy: explore must be >= 0");
}

std::unique_ptr<Agent> EpsilonGreedyAgent::clone() const {
    return std::make_unique<EpsilonGreedyAgent>(*this);
}

double EpsilonGreedyAgent::exploration_rate() const {
    const auto t = static_cast<double>(stats_.steps() + 1);
    double rate = explore_;
    switch (decay_) {
    case ExplorationDecay::constant: break;
    case ExplorationDecay::inverse: rate = explore_ / t; break;
    case ExplorationDecay::inverse_sqrt: rate = explore_ / std::sqrt(t); break;
    }
    return std::clamp(rate, 0.0, 1.0);
}

int EpsilonGreedyAgent::greedy_action(int state) const {
    int best = 0;
    double best_mean = stats_.mean_reward(state, 0, 1.0);
    for (int a = 1; a < num_actions(); ++a) {
        const double m = stats_.mean_reward(state, a, 1.0);
        if (m > best_mean) {
            best = a;
            best_mean = m;
        }
    }
    return best;
}

int EpsilonGreedyAgent::act(int state, double u) {
    const double rate = exploration_rate();
    if (u < rate) return uniform_index(u / rate, num_actions());
    return greedy_action(state);
}

std::optional<std::vector<double>> EpsilonGreedyAgent::action_probabilities(int state) const {
    const double rate = exploration_rate();
    std::vector<double> p(static_cast<std::size_t>(num_actions()), rate / num_actions());
    p[static_cast<std::size_t>(greedy_action(state))] += 1.0 - rate;
    return p;
}

// ---------------------------------------------------------------------------
// UCB1

Ucb1Agent::Ucb1Agent(int num_states, int num_actions, double c)
    : Agent(num_states, num_actions), c_(c) {
    if (num_states != 1) throw UnsupportedInstance("ucb1 is a bandit-only agent (S must be 1)");
    if (!(c >= 0.0)) throw ParameterError("ucb1: c must be >= 0");
}

std::unique_ptr<Agent> Ucb1Agent::clone() const { return std::make_unique<Ucb1Agent>(*this); }

double Ucb1Agent::index(int arm) const {
    const auto n = static_cast<double>(stats_.visits(0, arm));
    if (n == 0.0) return std::numeric_limits<double>::infinity();
    const auto t = static_cast<double>(stats_.steps());
    return stats_.reward_sum(0, arm) / n + c_ * std::sqrt(std::log(t) / n);
}

int Ucb1Agent::choose() const {
    for (int a = 0; a < num_actions(); ++a)
        if (stats_.visits(0, a) == 0) return a;
    int best = 0;
    double best_index = index(0);
    for (int a = 1; a < num_actions(); ++a) {
        const double i = index(a);
        if (i > best_index) {
            best = a;
            best_index = i;
        }
    }
    return best;
}

int Ucb1Agent::act(int, double) { return choose(); }

std::optional<std::vector<double>> Ucb1Agent::action_probabilities(int) const {
    return point_mass(num_actions(), choose());
}

// ---------------------------------------------------------------------------
// OptimisticModel

OptimisticModelAgent::OptimisticModelAgent(int num_states, int num_actions, OptimisticConfig config)
    : Agent(num_states, num_actions), config_(config) {
    if (!(config.confidence > 0.0)) throw ParameterError("optimistic: c1 must be > 0");
    on_reset();
}

std::unique_ptr<Agent> OptimisticModelAgent::clone() const {
    return std::make_unique<OptimisticModelAgent>(*this);
}

void OptimisticModelAgent::on_reset() {
    const auto pairs = static_cast<std::size_t>(num_states()) * num_actions();
    episode_start_visits_.assign(pairs, 0);
    episode_visits_.assign(pairs, 0);
    episodes_ = 1;
    plan();
}

void OptimisticModelAgent::on_update(const Observation& obs) {
    const std::size_t i = static_cast<std::size_t>(obs.state) * num_actions() + obs.action;
    ++episode_visits_[i];
    if (episode_visits_[i] >= std::max<std::int64_t>(1, episode_start_visits_[i])) {
        for (int s = 0; s < num_states(); ++s)
            for (int a = 0; a < num_actions(); ++a)
                episode_start_visits_[static_cast<std::size_t>(s) * num_actions() + a] =
                    stats_.visits(s, a);
        std::fill(episode_visits_.begin(), episode_visits_.end(), 0);
        ++episodes_;
        plan();
    }
}

void OptimisticModelAgent::plan() {
    const int S = num_states();
    const int A = num_actions();
    const double log_t = std::log(std::max<double>(2.0, static_cast<double>(stats_.steps() + 1)));

    std::vector<double> reward(static_cast<std::size_t>(S) * A);
    std::vector<double> radius(static_cast<std::size_t>(S) * A);
    std::vector<double> empirical(static_cast<std::size_t>(S) * A * S, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const std::size_t i = static_cast<std::size_t>(s) * A + a;
            const auto n = static_cast<double>(stats_.visits(s, a));
            if (n == 0.0) {
                reward[i] = 1.0;
                radius[i] = 2.0;
                continue;
            }
            reward[i] = std::min(1.0, stats_.reward_sum(s, a) / n +
                                          std::sqrt(config_.confidence * log_t / (2.0 * n)));
            radius[i] = std::sqrt(config_.confidence * log_t / n);
            for (int t = 0; t < S; ++t)
                empirical[i * S + t] = static_cast<double>(stats_.transitions(s, a, t)) / n;
        }

    std::vector<int> order(static_cast<std::size_t>(S));
    std::vector<double> p(static_cast<std::size_t>(S));
    std::vector<double> sorted_for;  // values the order was computed for
    auto q = [&](int s, int a, const std::vector<double>& u) {
        if (sorted_for != u) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return u[x] > u[y]; });
            sorted_for = u;
        }
        const std::size_t i = static_cast<std::size_t>(s) * A + a;
        // Inner maximization over the L1 ball: move up to radius/2 mass onto
        // the best state, taking it from the worst states first.
        std::copy_n(empirical.begin() + static_cast<std::ptrdiff_t>(i * S), S, p.begin());
        if (stats_.visits(s, a) == 0) std::fill(p.begin(), p.end(), 0.0);
        const int best = order[0];
        p[best] = std::min(1.0, p[best] + radius[i] / 2.0);
        double total = std::accumulate(p.begin(), p.end(), 0.0);
        for (int k = S - 1; k >= 0 && total > 1.0; --k) {
            const int worst = order[k];
            if (worst == best) continue;
            const double removable = std::min(p[worst], total - 1.0);
            p[worst] -= removable;
            total -= removable;
        }
        if (total < 1.0) p[best] += 1.0 - total;
        double value = reward[i];
        for (int t = 0; t < S; ++t) value += p[t] * u[t];
        return value;
    };
    policy_ = average_reward_value_iteration(S, A, config_.tolerance, config_.max_iterations, q);
}

int OptimisticModelAgent::act(int state, double) { return policy_[state]; }

std::optional<std::vector<double>> OptimisticModelAgent::action_probabilities(int state) const {
    return point_mass(num_actions(), policy_[state]);
}

// ---------------------------------------------------------------------------
// PosteriorSampling

PosteriorSamplingAgent::PosteriorSamplingAgent(int num_states, int num_actions,
                                               PosteriorConfig config)
    : Agent(num_states, num_actions), config_(config) {
    if (!(config.reward_alpha > 0.0 && config.reward_beta > 0.0 && config.transition_prior > 0.0))
        throw ParameterError("psrl: prior parameters must be > 0");
    on_reset();
}

std::unique_ptr<Agent> PosteriorSamplingAgent::clone() const {
    return std::make_unique<PosteriorSamplingAgent>(*this);
}

PosteriorSamplingAgent::BetaParams PosteriorSamplingAgent::reward_posterior(int s, int a) const {
    const double sum = stats_.reward_sum(s, a);
    const auto n = static_cast<double>(stats_.visits(s, a));
    return {config_.reward_alpha + sum, config_.reward_beta + n - sum};
}

void PosteriorSamplingAgent::on_reset() {
    const auto pairs = static_cast<std::size_t>(num_states()) * num_actions();
    episode_start_visits_.assign(pairs, 0);
    episode_visits_.assign(pairs, 0);
    policy_.assign(static_cast<std::size_t>(num_states()), 0);
    needs_sample_ = true;
}

void PosteriorSamplingAgent::on_update(const Observation& obs) {
    if (num_states() == 1) return;
    const std::size_t i = static_cast<std::size_t>(obs.state) * num_actions() + obs.action;
    ++episode_visits_[i];
    if (episode_visits_[i] >= std::max<std::int64_t>(1, episode_start_visits_[i])) {
        for (int s = 0; s < num_states(); ++s)
            for (int a = 0; a < num_actions(); ++a)
                episode_start_visits_[static_cast<std::size_t>(s) * num_actions() + a] =
                    stats_.visits(s, a);
        std::fill(episode_visits_.begin(), episode_visits_.end(), 0);
        needs_sample_ = true;
    }
}

namespace {

double sample_beta(PhiloxStream& stream, double alpha, double beta) {
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta, 1.0);
    const double x = ga(stream);
    const double y = gb(stream);
    return x / (x + y);
}

} // namespace

void PosteriorSamplingAgent::resample(double u) {
    const int S = num_states();
    const int A = num_actions();
    PhiloxStream stream(std::bit_cast<std::uint64_t>(u), static_cast<std::uint64_t>(stats_.steps()));
    std::vector<double> reward(static_cast<std::size_t>(S) * A);
    std::vector<double> model(static_cast<std::size_t>(S) * A * S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const std::size_t i = static_cast<std::size_t>(s) * A + a;
            const auto post = reward_posterior(s, a);
            reward[i] = sample_beta(stream, post.alpha, post.beta);
            double total = 0.0;
            for (int t = 0; t < S; ++t) {
                std::gamma_distribution<double> g(
                    config_.transition_prior + static_cast<double>(stats_.transitions(s, a, t)), 1.0);
                model[i * S + t] = g(stream);
                total += model[i * S + t];
            }
            for (int t = 0; t < S; ++t) model[i * S + t] /= total;
        }
    auto q = [&](int s, int a, const std::vector<double>& values) {
        const std::size_t i = static_cast<std::size_t>(s) * A + a;
        double v = reward[i];
        for (int t = 0; t < S; ++t) v += model[i * S + t] * values[t];
        return v;
    };
    policy_ = average_reward_value_iteration(S, A, config_.tolerance, config_.max_iterations, q);
    needs_sample_ = false;
}

int PosteriorSamplingAgent::act(int state, double u) {
    if (num_states() == 1) {
        PhiloxStream stream(std::bit_cast<std::uint64_t>(u),
                            static_cast<std::uint64_t>(stats_.steps()));
        int best = 0;
        double best_draw = -1.0;
        for (int a = 0; a < num_actions(); ++a) {
            const auto post = reward_posterior(0, a);
            const double draw = sample_beta(stream, post.alpha, post.beta);
            if (draw > best_draw) {
                best = a;
                best_draw = draw;
            }
        }
        return best;
    }
    if (needs_sample_) resample(u);
    return policy_[state];
}

std::optional<std::vector<double>> PosteriorSamplingAgent::action_probabilities(int) const {
    if (num_states() != 1) return std::nullopt;
    std::vector<BetaParams> params;
    for (int a = 0; a < num_actions(); ++a) params.push_back(reward_posterior(0, a));
    return beta_argmax_probabilities(params);
}

std::vector<double> beta_argmax_probabilities(
    const std::vector<PosteriorSamplingAgent::BetaParams>& params) {
    using boost::math::beta_distribution;
    const std::size_t n = params.size();
    std::vector<beta_distribution<double>> dists;
    for (const auto& p : params) dists.emplace_back(p.alpha, p.beta);
    std::vector<double> out(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        auto integrand = [&](double x) {
            double value = boost::math::pdf(dists[a], x);
            for (std::size_t b = 0; b < n; ++b)
                if (b != a) value *= boost::math::cdf(dists[b], x);
            return value;
        };
        out[a] = boost::math::quadrature::gauss<double, 30>::integrate(integrand, 0.0, 1.0);
    }
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& p : out) p /= total;
    return out;
}

// ---------------------------------------------------------------------------
// Specs and factory

std::string AgentSpec::to_string() const {
    std::string out = kind;
    char sep = ':';
    for (const auto& [key, value] : params) {
        out += sep;
        out += key + "=" + value;
        sep = ',';
    }
    return out;
}

AgentSpec parse_agent_spec(std::string_view text) {
    AgentSpec spec;
    const auto colon = text.find(':');
    spec.kind = std::string(text.substr(0, colon));
    if (spec.kind.empty()) throw ConfigError("agent: empty agent name");
    if (colon == std::string_view::npos) return spec;
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0)
            throw ConfigError("agent: parameter '" + std::string(item) + "' must be key=value");
        spec.params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return spec;
}

namespace {

class ParamReader {
public:
    explicit ParamReader(const AgentSpec& spec) : spec_(spec) {}

    double number(const std::string& key, double fallback) {
        used_.push_back(key);
        const auto it = spec_.params.find(key);
        if (it == spec_.params.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("agent " + spec_.kind + ": parameter '" + key +
                              "' is not a number: '" + it->second + "'");
        }
    }

    std::string text(const std::string& key, const std::string& fallback) {
        used_.push_back(key);
        const auto it = spec_.params.find(key);
        return it == spec_.params.end() ? fallback : it->second;
    }

    void finish() const {
        for (const auto& [key, value] : spec_.params)
            if (std::find(used_.begin(), used_.end(), key) == used_.end())
                throw ConfigError("agent " + spec_.kind + ": unknown parameter '" + key + "'");
    }

private:
    const AgentSpec& spec_;
    std::vector<std::string> used_;
};

} // namespace

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, int num_states, int num_actions) {
    ParamReader params(spec);
    std::unique_ptr<Agent> agent;
    if (spec.kind == "uniform") {
        agent = std::make_unique<UniformRandomAgent>(num_states, num_actions);
    } else if (spec.kind == "egreedy") {
        const double explore = params.number("explore", 0.1);
        const std::string decay = params.text("decay", "constant");
        ExplorationDecay d = ExplorationDecay::constant;
        if (decay == "inverse")
            d = ExplorationDecay::inverse;
        else if (decay == "inverse_sqrt")
            d = ExplorationDecay::inverse_sqrt;
        else if (decay != "constant")
            throw ConfigError("agent egreedy: decay must be constant, inverse or inverse_sqrt");
        agent = std::make_unique<EpsilonGreedyAgent>(num_states, num_actions, explore, d);
    } else if (spec.kind == "ucb1") {
        agent = std::make_unique<Ucb1Agent>(num_states, num_actions,
                                            params.number("c", std::numbers::sqrt2));
    } else if (spec.kind == "optimistic") {
        OptimisticConfig config;
        config.confidence = params.number("c1", config.confidence);
        config.tolerance = params.number("tol", config.tolerance);
        agent = std::make_unique<OptimisticModelAgent>(num_states, num_actions, config);
    } else if (spec.kind == "psrl") {
        PosteriorConfig config;
        config.reward_alpha = params.number("alpha", config.reward_alpha);
        config.reward_beta = params.number("beta", config.reward_beta);
        config.transition_prior = params.number("prior", config.transition_prior);
        agent = std::make_unique<PosteriorSamplingAgent>(num_states, num_actions, config);
    } else {
        throw ConfigError("agent: unknown kind '" + spec.kind +
                          "' (expected uniform, egreedy, ucb1, optimistic or psrl)");
    }
    params.finish();
    return agent;
}

std::vector<AgentSpec> default_roster() {
    return {{"uniform", {}}, {"egreedy", {}}, {"ucb1", {}}, {"optimistic", {}}, {"psrl", {}}};
}

std::vector<AgentSpec> mdp_roster() {
    return {{"uniform", {}}, {"egreedy", {}}, {"optimistic", {}}, {"psrl", {}}};
}

} // namespace regret_lab
