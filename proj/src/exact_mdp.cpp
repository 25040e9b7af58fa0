#include "regret_lab/exact_mdp.hpp"

#include "regret_lab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace regret_lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_policy(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    if (static_cast<int>(mu.size()) != mdp.num_states())
        throw ParameterError("policy must assign one action per state");
    for (int a : mu)
        if (a < 0 || a >= mdp.num_actions()) throw ParameterError("policy action out of range");
}

/// Solves M x = b and enforces the residual bound.
Eigen::VectorXd checked_solve(const Eigen::MatrixXd& m, const Eigen::VectorXd& b,
                              const char* what) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) throw SolveError(std::string(what) + ": singular linear system");
    Eigen::VectorXd x = lu.solve(b);
    const double residual = (m * x - b).lpNorm<Eigen::Infinity>();
    if (!(residual <= kSolveResidualTolerance)) {
        std::ostringstream msg;
        msg << what << ": residual " << residual << " exceeds " << kSolveResidualTolerance;
        throw SolveError(msg.str());
    }
    return x;
}

/// reach[s][t] == true iff t is reachable from s (s reaches itself).
std::vector<std::vector<bool>> reachability(const Eigen::MatrixXd& p) {
    const auto n = static_cast<int>(p.rows());
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int s = 0; s < n; ++s) {
        std::deque<int> queue{s};
        reach[s][s] = true;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v = 0; v < n; ++v)
                if (p(u, v) > 0.0 && !reach[s][v]) {
                    reach[s][v] = true;
                    queue.push_back(v);
                }
        }
    }
    return reach;
}

int lowest_recurrent_state(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    const auto classes = closed_classes(mdp, mu);
    if (classes.size() != 1) {
        std::ostringstream msg;
        msg << "policy induces " << classes.size() << " closed classes; unichain required";
        throw NonUnichainError(msg.str());
    }
    return classes.front().front();
}

struct GainBias {
    double gain;
    std::vector<double> bias;
};

GainBias solve_gain_bias(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    check_policy(mdp, mu);
    const int ref = lowest_recurrent_state(mdp, mu);
    const int S = mdp.num_states();
    const Eigen::MatrixXd p = policy_transition_matrix(mdp, mu);
    const Eigen::VectorXd r = policy_reward_vector(mdp, mu);
    // Unknown slot `ref` carries the gain; h(ref) is pinned to 0.
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(S, S) - p;
    m.col(ref).setOnes();
    const Eigen::VectorXd x = checked_solve(m, r, "bias equations");
    GainBias out{x(ref), std::vector<double>(x.data(), x.data() + S)};
    out.bias[static_cast<std::size_t>(ref)] = 0.0;
    return out;
}

/// States from which `target` is reached almost surely under some policy,
/// and the actions that keep the process inside that set.
struct AlmostSureReach {
    std::vector<bool> in_set;
    std::vector<std::vector<int>> allowed;
};

AlmostSureReach almost_sure_reach(const TabularMdp& mdp, int target) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    AlmostSureReach out{std::vector<bool>(S, true), std::vector<std::vector<int>>(S)};
    while (true) {
        for (int s = 0; s < S; ++s) {
            out.allowed[s].clear();
            if (!out.in_set[s]) continue;
            for (int a = 0; a < A; ++a) {
                bool inside = true;
                for (int t = 0; t < S && inside; ++t)
                    if (mdp.transition(s, a, t) > 0.0 && !out.in_set[t]) inside = false;
                if (inside) out.allowed[s].push_back(a);
            }
        }
        // Backward search from the target over allowed edges.
        std::vector<bool> reaches(S, false);
        reaches[target] = true;
        bool grew = true;
        while (grew) {
            grew = false;
            for (int s = 0; s < S; ++s) {
                if (reaches[s] || !out.in_set[s]) continue;
                for (int a : out.allowed[s]) {
                    bool hit = false;
                    for (int t = 0; t < S && !hit; ++t)
                        hit = mdp.transition(s, a, t) > 0.0 && reaches[t];
                    if (hit) {
                        reaches[s] = true;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (reaches == out.in_set) return out;
        out.in_set = reaches;
    }
}

} // namespace

Eigen::MatrixXd policy_transition_matrix(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    check_policy(mdp, mu);
    const int S = mdp.num_states();
    Eigen::MatrixXd p(S, S);
    for (int s = 0; s < S; ++s)
        for (int t = 0; t < S; ++t) p(s, t) = mdp.transition(s, mu[s], t);
    return p;
}

Eigen::VectorXd policy_reward_vector(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    check_policy(mdp, mu);
    Eigen::VectorXd r(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s) r(s) = mdp.reward(s, mu[s]);
    return r;
}

std::vector<std::vector<int>> closed_classes(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    const auto p = policy_transition_matrix(mdp, mu);
    const int S = mdp.num_states();
    const auto reach = reachability(p);
    std::vector<std::vector<int>> classes;
    std::vector<bool> assigned(S, false);
    for (int s = 0; s < S; ++s) {
        if (assigned[s]) continue;
        std::vector<int> members;
        bool closed = true;
        for (int t = 0; t < S; ++t) {
            if (reach[s][t] && reach[t][s])
                members.push_back(t);
            else if (reach[s][t])
                closed = false;
        }
        for (int t : members) assigned[t] = true;
        if (closed) classes.push_back(std::move(members));
    }
    return classes;
}

void require_unichain(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    (void)lowest_recurrent_state(mdp, mu);
}

std::vector<double> stationary_distribution(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    require_unichain(mdp, mu);
    const int S = mdp.num_states();
    const Eigen::MatrixXd p = policy_transition_matrix(mdp, mu);
    // pi (P - I) = 0 with one balance equation replaced by sum(pi) = 1.
    Eigen::MatrixXd m = p.transpose() - Eigen::MatrixXd::Identity(S, S);
    m.row(S - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S);
    rhs(S - 1) = 1.0;
    const Eigen::VectorXd pi = checked_solve(m, rhs, "stationary distribution");
    std::vector<double> out(pi.data(), pi.data() + S);
    for (double& x : out) x = std::max(0.0, x);
    return out;
}

std::vector<double> average_reward(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    const auto pi = stationary_distribution(mdp, mu);
    double gain = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) gain += pi[s] * mdp.reward(s, mu[s]);
    return std::vector<double>(static_cast<std::size_t>(mdp.num_states()), gain);
}

std::vector<double> bias(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    return solve_gain_bias(mdp, mu).bias;
}

double theta1(double delta0, double delta1) {
    if (!(delta0 + delta1 > 0.0)) throw ParameterError("theta1 requires delta0 + delta1 > 0");
    return delta0 / (delta0 + delta1);
}

double theta1_star(double delta0, double delta1, double eps) {
    return theta1(delta0, delta1 - eps);
}

double optimal_gap(double delta0, double delta1, double eps) {
    if (!(eps < delta0 + delta1)) throw ParameterError("optimal_gap requires eps < delta0 + delta1");
    const double total = delta0 + delta1;
    return delta0 * eps / (total * (total - eps));
}

Eigen::MatrixXd hitting_times(const TabularMdp& mdp, const DeterministicPolicy& mu) {
    const Eigen::MatrixXd p = policy_transition_matrix(mdp, mu);
    const int S = mdp.num_states();
    const auto reach = reachability(p);
    Eigen::MatrixXd out = Eigen::MatrixXd::Constant(S, S, kInf);
    for (int target = 0; target < S; ++target) {
        // s has a finite hitting time iff every state reachable from s before
        // hitting the target can still reach the target.
        Eigen::MatrixXd absorbing = p;
        absorbing.row(target).setZero();
        absorbing(target, target) = 1.0;
        const auto reach_abs = reachability(absorbing);
        std::vector<int> finite;
        for (int s = 0; s < S; ++s) {
            if (s == target) continue;
            bool ok = true;
            for (int t = 0; t < S && ok; ++t)
                if (reach_abs[s][t] && !reach[t][target]) ok = false;
            if (ok) finite.push_back(s);
        }
        out(target, target) = 0.0;
        if (finite.empty()) continue;
        const auto n = static_cast<int>(finite.size());
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) -= p(finite[i], finite[j]);
        const Eigen::VectorXd tau = checked_solve(m, Eigen::VectorXd::Ones(n), "hitting times");
        for (int i = 0; i < n; ++i) out(finite[i], target) = tau(i);
    }
    return out;
}

std::vector<double> min_hitting_times_to(const TabularMdp& mdp, int target,
                                         const SspOptions& options) {
    const int S = mdp.num_states();
    if (target < 0 || target >= S) throw ParameterError("target state out of range");
    const auto reach = almost_sure_reach(mdp, target);
    std::vector<double> v(static_cast<std::size_t>(S), 0.0);
    for (int s = 0; s < S; ++s)
        if (!reach.in_set[s]) v[s] = kInf;

    auto backup = [&](int s, int a, const std::vector<double>& values) {
        double total = 1.0;
        for (int t = 0; t < S; ++t)
            if (t != target) {
                const double pt = mdp.transition(s, a, t);
                if (pt > 0.0) total += pt * values[t];
            }
        return total;
    };

    bool converged = false;
    for (long it = 0; it < options.max_iterations; ++it) {
        double change = 0.0;
        for (int s = 0; s < S; ++s) {
            if (s == target || !reach.in_set[s]) continue;
            double best = kInf;
            for (int a : reach.allowed[s]) best = std::min(best, backup(s, a, v));
            change = std::max(change, std::abs(best - v[s]));
            v[s] = best;
        }
        if (change < options.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) throw SolveError("SSP value iteration hit its iteration cap");

    // Polish: evaluate the greedy policy exactly. Value iteration from zero
    // approaches the optimum from below, so its stopping error is bounded by
    // change / (1 - contraction), which can exceed the tolerance on slow chains.
    std::vector<int> states;
    std::vector<int> index(static_cast<std::size_t>(S), -1);
    for (int s = 0; s < S; ++s)
        if (s != target && reach.in_set[s]) {
            index[s] = static_cast<int>(states.size());
            states.push_back(s);
        }
    if (states.empty()) return v;
    const auto n = static_cast<int>(states.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        const int s = states[i];
        int greedy = reach.allowed[s].front();
        double best = kInf;
        for (int a : reach.allowed[s]) {
            const double q = backup(s, a, v);
            if (q < best - 1e-12) {
                best = q;
                greedy = a;
            }
        }
        for (int t = 0; t < S; ++t)
            if (index[t] >= 0) m(i, index[t]) -= mdp.transition(s, greedy, t);
    }
    try {
        const Eigen::VectorXd tau = checked_solve(m, Eigen::VectorXd::Ones(n), "SSP policy evaluation");
        for (int i = 0; i < n; ++i) v[states[i]] = tau(i);
    } catch (const SolveError&) {
        // Greedy policy is improper or ill-conditioned; keep the iterate.
    }
    return v;
}

Eigen::MatrixXd min_hitting_times(const TabularMdp& mdp, const SspOptions& options) {
    const int S = mdp.num_states();
    Eigen::MatrixXd out(S, S);
    for (int target = 0; target < S; ++target) {
        const auto col = min_hitting_times_to(mdp, target, options);
        for (int s = 0; s < S; ++s) out(s, target) = col[s];
    }
    return out;
}

double diameter(const TabularMdp& mdp, const SspOptions& options) {
    if (mdp.num_states() == 1) return 0.0;
    const Eigen::MatrixXd t = min_hitting_times(mdp, options);
    if (!t.allFinite())
        throw UndefinedDiameterError("diameter undefined: MDP is not communicating");
    return t.maxCoeff();
}

OptimalAverageReward optimal_average_reward_policy(const TabularMdp& mdp) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    DeterministicPolicy mu(static_cast<std::size_t>(S), 0);
    for (int s = 0; s < S; ++s)
        for (int a = 1; a < A; ++a)
            if (mdp.reward(s, a) > mdp.reward(s, mu[s])) mu[s] = a;

    constexpr int kMaxIterations = 10'000;
    for (int it = 0; it < kMaxIterations; ++it) {
        const GainBias gb = solve_gain_bias(mdp, mu);
        bool changed = false;
        for (int s = 0; s < S; ++s) {
            auto value = [&](int a) {
                double total = mdp.reward(s, a);
                for (int t = 0; t < S; ++t) total += mdp.transition(s, a, t) * gb.bias[t];
                return total;
            };
            const double incumbent = value(mu[s]);
            int best = mu[s];
            double best_value = incumbent;
            for (int a = 0; a < A; ++a) {
                const double q = value(a);
                if (q > incumbent + 1e-12 && q > best_value + 1e-15) {
                    best = a;
                    best_value = q;
                }
            }
            if (best != mu[s]) {
                mu[s] = best;
                changed = true;
            }
        }
        if (!changed) return OptimalAverageReward{mu, gb.gain, gb.bias};
    }
    throw SolveError("policy iteration did not terminate");
}

OneWayDiameter one_way_diameter(const TabularMdp& mdp, const SspOptions& options) {
    if (mdp.num_states() == 1) return {0.0, 0};
    const auto opt = optimal_average_reward_policy(mdp);
    const auto ref = static_cast<int>(
        std::max_element(opt.bias.begin(), opt.bias.end()) - opt.bias.begin());
    const auto times = min_hitting_times_to(mdp, ref, options);
    const double value = *std::max_element(times.begin(), times.end());
    if (!std::isfinite(value))
        throw UndefinedDiameterError("one-way diameter undefined: reference state unreachable");
    return {value, ref};
}

MdpReport analyze(const TabularMdp& mdp, std::optional<DeterministicPolicy> mu) {
    MdpReport report;
    report.policy = mu ? *mu : optimal_average_reward_policy(mdp).policy;
    const GainBias gb = solve_gain_bias(mdp, report.policy);
    report.lambda.assign(static_cast<std::size_t>(mdp.num_states()), gb.gain);
    report.stationary = stationary_distribution(mdp, report.policy);
    report.bias = gb.bias;
    report.hitting_times = hitting_times(mdp, report.policy);
    try {
        report.diameter = diameter(mdp);
    } catch (const UndefinedDiameterError&) {
    }
    try {
        const auto dow = one_way_diameter(mdp);
        report.one_way_diameter = dow.value;
        report.reference_state = dow.reference_state;
    } catch (const Error&) {
        report.reference_state = static_cast<int>(
            std::max_element(report.bias.begin(), report.bias.end()) - report.bias.begin());
    }
    return report;
}

FiniteHorizonValues backward_induction(const FiniteHorizonMdp& fh) {
    const TabularMdp& m = fh.base;
    const int S = m.num_states();
    const int A = m.num_actions();
    const int H = fh.horizon;
    FiniteHorizonValues out;
    out.horizon = H;
    out.num_states = S;
    out.num_actions = A;
    out.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    out.v.assign(static_cast<std::size_t>(H) * S, 0.0);
    out.policy.assign(static_cast<std::size_t>(H) * S, 0);
    std::vector<double> next(static_cast<std::size_t>(S), 0.0);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double best = -kInf;
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double q = m.reward(s, a);
                for (int t = 0; t < S; ++t) q += m.transition(s, a, t) * next[t];
                out.q[(static_cast<std::size_t>(h) * S + s) * A + a] = q;
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            out.v[static_cast<std::size_t>(h) * S + s] = best;
            out.policy[static_cast<std::size_t>(h) * S + s] = best_a;
        }
        std::copy_n(out.v.begin() + static_cast<std::ptrdiff_t>(h) * S, S, next.begin());
    }
    return out;
}

std::vector<double> evaluate_finite_horizon_policy(const FiniteHorizonMdp& fh,
                                                   const std::vector<int>& action_of) {
    const TabularMdp& m = fh.base;
    const int S = m.num_states();
    const int H = fh.horizon;
    if (static_cast<int>(action_of.size()) != S * H)
        throw ParameterError("finite-horizon policy needs S*H entries");
    std::vector<double> v(static_cast<std::size_t>(H) * S, 0.0);
    for (int h = H - 1; h >= 0; --h)
        for (int s = 0; s < S; ++s) {
            const int a = action_of[static_cast<std::size_t>(h) * S + s];
            double total = m.reward(s, a);
            if (h + 1 < H)
                for (int t = 0; t < S; ++t)
                    total += m.transition(s, a, t) * v[static_cast<std::size_t>(h + 1) * S + t];
            v[static_cast<std::size_t>(h) * S + s] = total;
        }
    return v;
}

} // namespace regret_lab
