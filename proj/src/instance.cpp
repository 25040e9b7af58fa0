#include "regret_lab/instance.hpp"

#include "regret_lab/errors.hpp"
#include "regret_lab/philox.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace regret_lab {

namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

[[noreturn]] void out_of_range(const std::string& what) {
    throw ParameterError("parameter out of range: " + what);
}

void check_distribution(std::span<const double> p, const std::string& name) {
    double total = 0.0;
    for (double x : p) {
        if (!std::isfinite(x) || x < 0.0)
            out_of_range(name + " has a negative or non-finite entry");
        total += x;
    }
    if (std::abs(total - 1.0) > TabularMdp::kRowSumTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << name << " sums to " << total << ", expected 1";
        out_of_range(msg.str());
    }
}

} // namespace

double BanditInstance::best_mean() const {
    double best = 0.0;
    for (double m : means) best = std::max(best, m);
    return best;
}

TabularMdp::TabularMdp(int num_states, int num_actions, std::vector<double> transitions,
                       std::vector<double> rewards)
    : num_states_(num_states), num_actions_(num_actions), transitions_(std::move(transitions)),
      rewards_(std::move(rewards)) {
    if (num_states < 1) out_of_range("num_states must be >= 1");
    if (num_actions < 1) out_of_range("num_actions must be >= 1");
    const auto S = static_cast<std::size_t>(num_states);
    const auto A = static_cast<std::size_t>(num_actions);
    if (transitions_.size() != S * A * S) out_of_range("transitions must have S*A*S entries");
    if (rewards_.size() != S * A) out_of_range("rewards must have S*A entries");
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            check_distribution(row(s, a), "transition row (" + std::to_string(s) + ", " +
                                              std::to_string(a) + ")");
            if (!is_probability(reward(s, a)))
                out_of_range("reward (" + std::to_string(s) + ", " + std::to_string(a) +
                             ") must lie in [0, 1]");
        }
    }
}

BanditInstance make_hard_bandit(int num_arms, double delta, double eps, int starred) {
    if (num_arms < 1) out_of_range("A >= 1 violated");
    if (!is_probability(delta)) out_of_range("delta in [0, 1] violated");
    if (!is_probability(eps)) out_of_range("eps in [0, 1] violated");
    if (delta + eps > 1.0) out_of_range("delta + eps <= 1 violated");
    if (starred < 0 || starred >= num_arms) out_of_range("0 <= starred < A violated");
    BanditInstance out;
    out.num_arms = num_arms;
    out.means.assign(static_cast<std::size_t>(num_arms), delta);
    out.means[static_cast<std::size_t>(starred)] = delta + eps;
    out.starred_arm = starred;
    out.base = delta;
    out.gap = eps;
    return out;
}

TwoStateMdpInstance make_two_state_mdp(int num_actions, double delta0, double delta1, double eps,
                                       int starred) {
    if (num_actions < 1) out_of_range("A >= 1 violated");
    if (!(delta0 > 0.0 && delta0 <= 1.0)) out_of_range("0 < delta0 <= 1 violated");
    if (!(delta1 > 0.0 && delta1 <= 1.0)) out_of_range("0 < delta1 <= 1 violated");
    if (!(eps >= 0.0 && eps < delta1)) out_of_range("0 <= eps < delta1 violated");
    if (starred < 0 || starred >= num_actions) out_of_range("0 <= starred < A violated");
    return TwoStateMdpInstance{num_actions, delta0, delta1, eps, starred};
}

TabularMdp to_tabular(const BanditInstance& bandit) {
    const int A = bandit.num_arms;
    return TabularMdp(1, A, std::vector<double>(static_cast<std::size_t>(A), 1.0), bandit.means);
}

namespace {

void write_gadget_block(const TwoStateMdpInstance& g, int starred, int offset, int S,
                        std::vector<double>& transitions, std::vector<double>& rewards) {
    const int A = g.num_actions;
    const int low = offset;
    const int high = offset + 1;
    auto at = [&](int s, int a, int next) -> double& {
        return transitions[(static_cast<std::size_t>(s) * A + a) * S + next];
    };
    for (int a = 0; a < A; ++a) {
        at(low, a, low) = 1.0 - g.delta0;
        at(low, a, high) = g.delta0;
        const double back = (a == starred) ? g.delta1 - g.gap : g.delta1;
        at(high, a, low) = back;
        at(high, a, high) = 1.0 - back;
        rewards[static_cast<std::size_t>(low) * A + a] = 0.0;
        rewards[static_cast<std::size_t>(high) * A + a] = 1.0;
    }
}

} // namespace

TabularMdp to_tabular(const TwoStateMdpInstance& gadget) {
    const int starred[] = {gadget.starred_arm};
    return concat_copies(gadget, 2, starred);
}

TabularMdp to_tabular(const Instance& instance) {
    return std::visit(
        [](const auto& inst) -> TabularMdp {
            using T = std::decay_t<decltype(inst)>;
            if constexpr (std::is_same_v<T, TabularMdp>)
                return inst;
            else if constexpr (std::is_same_v<T, FiniteHorizonMdp>)
                return inst.expand();
            else
                return to_tabular(inst);
        },
        instance);
}

TabularMdp concat_copies(const TwoStateMdpInstance& gadget, int num_states,
                         std::span<const int> starred_per_copy) {
    if (num_states < 2) out_of_range("S >= 2 violated");
    const int copies = num_copies_for(num_states);
    if (static_cast<int>(starred_per_copy.size()) != copies)
        out_of_range("starred_per_copy must have ceil(S/2) entries");
    for (int a : starred_per_copy)
        if (a < 0 || a >= gadget.num_actions) out_of_range("per-copy starred action out of range");
    const int S = 2 * copies;
    const int A = gadget.num_actions;
    std::vector<double> transitions(static_cast<std::size_t>(S) * A * S, 0.0);
    std::vector<double> rewards(static_cast<std::size_t>(S) * A, 0.0);
    for (int k = 0; k < copies; ++k)
        write_gadget_block(gadget, starred_per_copy[static_cast<std::size_t>(k)], 2 * k, S,
                           transitions, rewards);
    return TabularMdp(S, A, std::move(transitions), std::move(rewards));
}

TabularMdp concat_copies(const TwoStateMdpInstance& gadget, int num_states) {
    if (num_states < 2) out_of_range("S >= 2 violated");
    const std::vector<int> starred(static_cast<std::size_t>(num_copies_for(num_states)),
                                   gadget.starred_arm);
    return concat_copies(gadget, num_states, starred);
}

std::vector<int> draw_starred_per_copy(int num_copies, int num_actions, std::uint64_t seed) {
    PhiloxStream stream(seed, 0x5354415252454400ull);
    std::vector<int> out(static_cast<std::size_t>(num_copies));
    for (int& a : out)
        a = std::min(num_actions - 1, static_cast<int>(stream.uniform() * num_actions));
    return out;
}

TabularMdp concat_copies(const TwoStateMdpInstance& gadget, int num_states, std::uint64_t seed) {
    if (num_states < 2) out_of_range("S >= 2 violated");
    return concat_copies(gadget, num_states,
                         draw_starred_per_copy(num_copies_for(num_states), gadget.num_actions, seed));
}

FiniteHorizonMdp finite_horizon(const TabularMdp& mdp, int horizon, std::vector<double> rho) {
    if (horizon < 1) out_of_range("H >= 1 violated");
    if (static_cast<int>(rho.size()) != mdp.num_states())
        out_of_range("rho must have one entry per state");
    check_distribution(rho, "rho");
    return FiniteHorizonMdp{mdp, horizon, std::move(rho)};
}

TabularMdp FiniteHorizonMdp::expand() const {
    const int S = base.num_states();
    const int A = base.num_actions();
    const int H = horizon;
    const int N = S * H;
    std::vector<double> transitions(static_cast<std::size_t>(N) * A * N, 0.0);
    std::vector<double> rewards(static_cast<std::size_t>(N) * A, 0.0);
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            const int from = expanded_index(s, h);
            for (int a = 0; a < A; ++a) {
                rewards[static_cast<std::size_t>(from) * A + a] = base.reward(s, a);
                double* row = transitions.data() + (static_cast<std::size_t>(from) * A + a) * N;
                for (int next = 0; next < S; ++next) {
                    if (h + 1 < H)
                        row[expanded_index(next, h + 1)] = base.transition(s, a, next);
                    else
                        row[expanded_index(next, 0)] = initial_distribution[static_cast<std::size_t>(next)];
                }
            }
        }
    }
    return TabularMdp(N, A, std::move(transitions), std::move(rewards));
}

std::string instance_kind(const Instance& instance) {
    switch (instance.index()) {
    case 0: return "bandit";
    case 1: return "two_state";
    case 2: return "tabular";
    default: return "finite_horizon";
    }
}

} // namespace regret_lab
