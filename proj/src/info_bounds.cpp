#include "regret_lab/info_bounds.hpp"

#include "regret_lab/errors.hpp"
#include "regret_lab/exact_mdp.hpp"
#include "regret_lab/philox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace regret_lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// a * ln(a / b) with 0 ln 0 = 0.
double xlogx_over(double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return kInf;
    return a * std::log(a / b);
}

void require_probability(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0))
        throw ParameterError(std::string("parameter out of range: ") + name + " must lie in [0, 1]");
}

} // namespace

KlValue KlValue::from_nats(double nats) { return KlValue{nats, nats / std::numbers::ln2}; }

BoundReport BoundReport::compare(double lhs, double rhs) {
    return BoundReport{lhs, rhs, lhs <= rhs, rhs - lhs};
}

KlValue kl_bernoulli(double p, double q) {
    require_probability(p, "p");
    require_probability(q, "q");
    if (p == q) return KlValue::from_nats(0.0);
    const double nats = xlogx_over(p, q) + xlogx_over(1.0 - p, 1.0 - q);
    return KlValue::from_nats(std::max(0.0, nats));
}

KlValue kl_discrete(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ParameterError("kl_discrete: distributions differ in size");
    double nats = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) nats += xlogx_over(p[i], q[i]);
    return KlValue::from_nats(std::max(0.0, nats));
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ParameterError("total_variation: distributions differ in size");
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
    return 0.5 * total;
}

BoundReport prop1_bound(double delta, double eps) {
    if (!(delta > 0.0 && delta <= 0.5))
        throw ParameterError("parameter out of range: 0 < delta <= 1/2 violated");
    if (!(eps >= 0.0)) throw ParameterError("parameter out of range: eps >= 0 violated");
    // Grid points on hundredths land on 1 - 2 delta only up to rounding.
    if (eps > 1.0 - 2.0 * delta + 1e-12)
        throw ParameterError("parameter out of range: eps <= 1 - 2 delta violated");
    const double lhs = kl_bernoulli(delta, delta + eps).bits;
    const double rhs = eps * eps / (delta * std::numbers::ln2);
    return BoundReport::compare(lhs, rhs);
}

double pinsker_gap(const KlValue& kl) {
    if (!(kl.nats >= 0.0)) throw ParameterError("pinsker_gap requires kl >= 0");
    return std::sqrt(kl.nats / 2.0);
}

KlValue kl_budget(double delta, double eps, std::int64_t T, int A) {
    if (A < 1) throw ParameterError("kl_budget requires A >= 1");
    if (T < 0) throw ParameterError("kl_budget requires T >= 0");
    const double per_pull = kl_bernoulli(delta, delta + eps).nats;
    return KlValue::from_nats(static_cast<double>(T) / A * per_pull);
}

TunedEpsilon optimal_epsilon_bandit(double delta, int A, std::int64_t T) {
    if (A < 1 || T < 1) throw ParameterError("optimal_epsilon_bandit requires A >= 1 and T >= 1");
    require_probability(delta, "delta");
    TunedEpsilon out;
    out.unclamped = std::sqrt(delta * A / (8.0 * static_cast<double>(T)));
    const double limit = std::max(0.0, std::min(1.0 - delta, 1.0 - 2.0 * delta));
    out.value = out.unclamped;
    if (out.value > limit) {
        out.value = limit;
        out.clamped = true;
        out.warning = "tuned eps exceeds min(1 - delta, 1 - 2 delta); clamped (increase T)";
    }
    return out;
}

TunedEpsilon optimal_epsilon_mdp(double delta1, double theta1_value, int A, std::int64_t T) {
    if (A < 1 || T < 1) throw ParameterError("optimal_epsilon_mdp requires A >= 1 and T >= 1");
    if (!(delta1 > 0.0 && delta1 <= 1.0)) throw ParameterError("0 < delta1 <= 1 violated");
    if (!(theta1_value > 0.0)) throw ParameterError("theta1 > 0 violated");
    TunedEpsilon out;
    out.unclamped = std::sqrt(delta1 * A / (8.0 * theta1_value * static_cast<double>(T)));
    out.value = out.unclamped;
    if (!(out.value < delta1)) {
        out.value = std::nextafter(delta1, 0.0);
        out.clamped = true;
        out.warning = "tuned eps >= delta1; clamped just below delta1 (increase T)";
    }
    return out;
}

double bandit_lower_bound(int A, std::int64_t T, double delta) {
    if (A < 2) throw ParameterError("bandit_lower_bound requires A >= 2");
    return std::sqrt(delta * A * static_cast<double>(T)) / 12.0;
}

double mdp_lower_bound(double delta0, double delta1, int A, std::int64_t T) {
    if (!(delta0 > 0.0 && delta1 > 0.0)) throw ParameterError("delta0, delta1 > 0 required");
    const double th = theta1(delta0, delta1);
    return std::sqrt(delta1 * th / (delta0 * delta0) * A * static_cast<double>(T)) /
           (32.0 * std::numbers::sqrt2);
}

double dow_scaling(double delta1, double d_ow) {
    if (!(delta1 > 0.0 && d_ow > 0.0)) throw ParameterError("dow_scaling requires delta1, D_ow > 0");
    return std::sqrt(d_ow / (1.0 + 1.0 / (delta1 * d_ow)));
}

double dow_scaling_product_form(double delta1, double d_ow) {
    if (!(delta1 > 0.0 && d_ow > 0.0)) throw ParameterError("dow_scaling requires delta1, D_ow > 0");
    return d_ow * std::sqrt(delta1 * theta1(1.0 / d_ow, delta1));
}

void GridCheck::record(const BoundReport& report) {
    if (grid_size == 0) {
        max_slack = report.slack;
        min_slack = report.slack;
    } else {
        max_slack = std::max(max_slack, report.slack);
        min_slack = std::min(min_slack, report.slack);
    }
    ++grid_size;
    if (!report.holds) ++violations;
}

std::vector<double> prop1_delta_grid() {
    std::vector<double> out;
    for (int i = 1; i <= 50; ++i) out.push_back(i / 100.0);
    return out;
}

std::vector<double> prop1_eps_grid(double delta) {
    // Integer arithmetic on hundredths keeps the upper end exact.
    const auto top = 100 - 2 * static_cast<int>(std::lround(100.0 * delta));
    std::vector<double> out;
    for (int j = 0; j <= top; ++j) out.push_back(j / 100.0);
    return out;
}

GridCheck verify_prop1_grid() {
    GridCheck check{"prop1_kl_bound"};
    for (double delta : prop1_delta_grid())
        for (double eps : prop1_eps_grid(delta)) check.record(prop1_bound(delta, eps));
    return check;
}

GridCheck verify_kl_nonnegativity_grid() {
    GridCheck check{"kl_nonnegative"};
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) {
            const double p = i / 20.0;
            const double q = j / 20.0;
            const double kl = kl_bernoulli(p, q).nats;
            // Encode "kl >= 0, and kl == 0 iff p == q" as lhs <= rhs.
            const bool ok = (i == j) ? kl == 0.0 : kl > 0.0;
            BoundReport r = BoundReport::compare(-kl, 0.0);
            r.holds = ok;
            check.record(r);
        }
    return check;
}

GridCheck verify_pinsker_corpus(std::uint64_t seed) {
    GridCheck check{"pinsker_tv"};
    PhiloxStream stream(seed, 0x50494e534b4552ull);
    for (int n = 2; n <= 16; ++n) {
        for (int pair = 0; pair < 64; ++pair) {
            std::vector<double> p(n);
            std::vector<double> q(n);
            double sp = 0.0;
            double sq = 0.0;
            for (int i = 0; i < n; ++i) {
                // Every fourth pair gets zeros in p to exercise 0 log 0.
                p[i] = (pair % 4 == 0 && i % 3 == 0) ? 0.0 : stream.uniform() + 1e-3;
                q[i] = stream.uniform() + 1e-3;
                sp += p[i];
                sq += q[i];
            }
            for (int i = 0; i < n; ++i) {
                p[i] /= sp;
                q[i] /= sq;
            }
            const double tv = total_variation(p, q);
            check.record(BoundReport::compare(tv, pinsker_gap(kl_discrete(p, q))));
            check.record(BoundReport::compare(tv, pinsker_gap(kl_discrete(q, p))));
        }
    }
    return check;
}

GridCheck verify_envelope_scaling() {
    GridCheck check{"envelope_sqrt2_scaling"};
    for (int A : {2, 3, 4, 8})
        for (std::int64_t T : {100, 1000, 10000, 123457}) {
            const double b = bandit_lower_bound(A, 2 * T) / bandit_lower_bound(A, T);
            check.record(BoundReport::compare(std::abs(b - std::numbers::sqrt2), 1e-12));
            for (double d0 : {0.05, 0.1, 0.3})
                for (double d1 : {0.05, 0.1, 0.3}) {
                    const double m = mdp_lower_bound(d0, d1, A, 2 * T) / mdp_lower_bound(d0, d1, A, T);
                    check.record(BoundReport::compare(std::abs(m - std::numbers::sqrt2), 1e-12));
                }
        }
    return check;
}

} // namespace regret_lab
