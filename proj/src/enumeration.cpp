#include "regret_lab/enumeration.hpp"

#include "regret_lab/errors.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

namespace regret_lab {

namespace {

struct Walk {
    std::vector<double> informed_means;
    std::vector<double> uninformed_means;
    int starred = -1;
    double best = 0.0;
    std::int64_t horizon = 0;

    EnumerationResult result;
    double history_kl = 0.0;
    std::unordered_map<std::uint64_t, std::pair<double, double>> by_rewards;

    void visit(const Agent& agent, std::int64_t depth, double p_informed, double p_uninformed,
               std::uint64_t reward_bits) {
        if (depth == horizon) {
            if (++result.leaves > kMaxEnumerationLeaves)
                throw EnumerationTooLarge("enumeration exceeds the leaf cap");
            if (p_uninformed > 0.0)
                history_kl += p_informed > 0.0 ? p_uninformed * std::log(p_uninformed / p_informed)
                                               : std::numeric_limits<double>::infinity();
            auto& slot = by_rewards[reward_bits];
            slot.first += p_uninformed;
            slot.second += p_informed;
            return;
        }
        const auto probs = agent.action_probabilities(0);
        if (!probs) throw UnsupportedInstance(agent.name() + " does not expose exact action probabilities");
        for (int a = 0; a < static_cast<int>(probs->size()); ++a) {
            const double pa = (*probs)[static_cast<std::size_t>(a)];
            if (pa <= 0.0) continue;
            const double wi = p_informed * pa;
            const double wu = p_uninformed * pa;
            const double shortfall = best - informed_means[static_cast<std::size_t>(a)];
            result.informed_regret += wi * shortfall;
            result.uninformed_regret += wu * shortfall;
            if (a == starred) {
                result.informed_star_pulls += wi;
                result.uninformed_star_pulls += wu;
            }
            for (int r = 0; r <= 1; ++r) {
                const double mi = informed_means[static_cast<std::size_t>(a)];
                const double mu = uninformed_means[static_cast<std::size_t>(a)];
                const double qi = r == 1 ? mi : 1.0 - mi;
                const double qu = r == 1 ? mu : 1.0 - mu;
                if (wi * qi == 0.0 && wu * qu == 0.0) continue;
                auto child = agent.clone();
                child->update({0, a, static_cast<double>(r), 0});
                visit(*child, depth + 1, wi * qi, wu * qu,
                      reward_bits | (static_cast<std::uint64_t>(r) << depth));
            }
        }
    }
};

BanditInstance starred_bandit(int A, double delta, double eps, int starred) {
    return make_hard_bandit(A, delta, eps, starred);
}

} // namespace

EnumerationResult enumerate_bandit(const Agent& agent, const BanditInstance& bandit, std::int64_t T) {
    if (bandit.num_arms > kMaxEnumerationArms || T > kMaxEnumerationHorizon)
        throw EnumerationTooLarge("enumeration caps are A <= 3 and T <= 10");
    if (T < 1) throw ParameterError("T >= 1 required");
    if (agent.num_states() != 1 || agent.num_actions() != bandit.num_arms)
        throw ParameterError("agent shape does not match the bandit");

    Walk walk;
    walk.informed_means = bandit.means;
    walk.uninformed_means = bandit.means;
    walk.starred = bandit.starred_arm;
    if (bandit.starred_arm >= 0)
        walk.uninformed_means[static_cast<std::size_t>(bandit.starred_arm)] = bandit.base;
    walk.best = bandit.best_mean();
    walk.horizon = T;

    auto root = agent.clone();
    root->reset();
    walk.visit(*root, 0, 1.0, 1.0, 0);

    walk.result.history_kl = KlValue::from_nats(std::max(0.0, walk.history_kl));
    double reward_kl = 0.0;
    for (const auto& [bits, p] : walk.by_rewards) {
        if (p.first <= 0.0) continue;
        reward_kl += p.second > 0.0 ? p.first * std::log(p.first / p.second)
                                    : std::numeric_limits<double>::infinity();
    }
    walk.result.reward_sequence_kl = KlValue::from_nats(std::max(0.0, reward_kl));
    return walk.result;
}

double exhaustive_expected_regret(const Agent& agent, const BanditInstance& bandit, std::int64_t T) {
    return enumerate_bandit(agent, bandit, T).informed_regret;
}

double exhaustive_uninformed_regret(const Agent& agent, int A, double delta, double eps, std::int64_t T) {
    double total = 0.0;
    for (int star = 0; star < A; ++star)
        total += enumerate_bandit(agent, starred_bandit(A, delta, eps, star), T).uninformed_regret;
    return total / A;
}

TrajectoryKlReport trajectory_kl_exact(const Agent& agent, double delta, double eps, int A,
                                       std::int64_t T, int starred) {
    const auto e = enumerate_bandit(agent, starred_bandit(A, delta, eps, starred), T);
    const double per_pull = kl_bernoulli(delta, delta + eps).nats;
    const auto t = static_cast<double>(T);

    TrajectoryKlReport report;
    report.kl = e.history_kl;
    report.reward_sequence_kl = e.reward_sequence_kl;
    report.budget = kl_budget(delta, eps, T, A);
    report.star_weighted = e.uninformed_star_pulls * per_pull;
    report.nonstar_weighted = (t - e.uninformed_star_pulls) * per_pull;
    report.informed_fraction = e.informed_star_pulls / t;
    report.uninformed_fraction = e.uninformed_star_pulls / t;
    report.pinsker_rhs = std::sqrt(report.kl.nats / 2.0);
    report.within_budget = report.kl.nats <= report.budget.nats * (1.0 + 1e-12) + 1e-15;
    report.pinsker_holds =
        report.informed_fraction - report.uninformed_fraction <= report.pinsker_rhs + 1e-12;
    report.pinsker_violations = report.pinsker_holds ? 0 : 1;
    return report;
}

TrajectoryKlReport trajectory_kl_exact(const Agent& agent, double delta, double eps, int A,
                                       std::int64_t T) {
    TrajectoryKlReport avg;
    for (int star = 0; star < A; ++star) {
        const auto r = trajectory_kl_exact(agent, delta, eps, A, T, star);
        avg.kl.nats += r.kl.nats / A;
        avg.reward_sequence_kl.nats += r.reward_sequence_kl.nats / A;
        avg.star_weighted += r.star_weighted / A;
        avg.nonstar_weighted += r.nonstar_weighted / A;
        avg.informed_fraction += r.informed_fraction / A;
        avg.uninformed_fraction += r.uninformed_fraction / A;
        avg.pinsker_violations += r.pinsker_violations;
    }
    avg.kl = KlValue::from_nats(avg.kl.nats);
    avg.reward_sequence_kl = KlValue::from_nats(avg.reward_sequence_kl.nats);
    avg.budget = kl_budget(delta, eps, T, A);
    avg.pinsker_rhs = std::sqrt(avg.kl.nats / 2.0);
    avg.within_budget = avg.kl.nats <= avg.budget.nats * (1.0 + 1e-12) + 1e-15;
    avg.pinsker_holds = avg.pinsker_violations == 0 &&
                        avg.informed_fraction - avg.uninformed_fraction <= avg.pinsker_rhs + 1e-12;
    return avg;
}

} // namespace regret_lab
