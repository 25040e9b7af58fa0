#pragma once

// Bernoulli KL, Pinsker, the KL budget of an uninformed agent, the tuned gap
// parameters, and the closed-form regret lower-bound envelopes.
//
// KL is computed in nats; KlValue carries a bits view alongside.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace regret_lab {

struct KlValue {
    double nats = 0.0;
    double bits = 0.0;

    static KlValue from_nats(double nats);
};

/// lhs <= rhs check with its slack (rhs - lhs).
struct BoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    double slack = 0.0;

    static BoundReport compare(double lhs, double rhs);
};

/// KL(Ber(p) || Ber(q)) with 0 log 0 = 0; +infinity when q puts zero mass
/// where p does not.
KlValue kl_bernoulli(double p, double q);

/// KL between two finite distributions (same conventions as kl_bernoulli).
KlValue kl_discrete(std::span<const double> p, std::span<const double> q);

double total_variation(std::span<const double> p, std::span<const double> q);

/// Left side kl_bernoulli(delta, delta + eps) in bits against
/// eps^2 / (delta ln 2). Valid for 0 < delta <= 1/2, 0 <= eps <= 1 - 2 delta.
BoundReport prop1_bound(double delta, double eps);

/// sqrt(KL / 2), an upper bound on total variation distance.
double pinsker_gap(const KlValue& kl);

/// (T / A) * kl_bernoulli(delta, delta + eps).
KlValue kl_budget(double delta, double eps, std::int64_t T, int A);

/// Tuned gap with clamping metadata.
struct TunedEpsilon {
    double value = 0.0;
    double unclamped = 0.0;
    bool clamped = false;
    std::string warning;
};

/// sqrt(delta A / (8 T)), clamped to delta + eps <= 1 and eps <= 1 - 2 delta.
TunedEpsilon optimal_epsilon_bandit(double delta, int A, std::int64_t T);

/// sqrt(delta1 A / (8 theta1 T)), clamped below delta1.
TunedEpsilon optimal_epsilon_mdp(double delta1, double theta1, int A, std::int64_t T);

/// (1/12) sqrt(delta A T); equals sqrt(A T) / 24 at delta = 1/4.
double bandit_lower_bound(int A, std::int64_t T, double delta = 0.25);

/// (1 / (32 sqrt 2)) sqrt(delta1 theta1(delta0, delta1) / delta0^2 * A T).
double mdp_lower_bound(double delta0, double delta1, int A, std::int64_t T);

/// sqrt(D / (1 + 1 / (delta1 D))): the D_ow-dependence of mdp_lower_bound
/// when delta0 = 1 / D.
double dow_scaling(double delta1, double d_ow);
/// The same quantity written as D * sqrt(delta1 * theta1(1/D, delta1)).
double dow_scaling_product_form(double delta1, double d_ow);

/// One row of an inequality grid suite.
struct GridCheck {
    std::string check_name;
    std::size_t grid_size = 0;
    std::size_t violations = 0;
    double max_slack = 0.0;
    double min_slack = 0.0;

    bool passed() const { return violations == 0; }
    void record(const BoundReport& report);
};

/// delta in {0.01..0.50} step 0.01, eps in {0..1-2delta} step 0.01.
GridCheck verify_prop1_grid();
/// kl >= 0 with equality exactly on the diagonal, p, q in {0, 0.05, .., 1}.
GridCheck verify_kl_nonnegativity_grid();
/// TV <= sqrt(KL / 2) over a deterministic corpus of distribution pairs
/// with up to 16 outcomes.
GridCheck verify_pinsker_corpus(std::uint64_t seed = 20160101);
/// Doubling T multiplies both envelopes by sqrt(2) to 1e-12.
GridCheck verify_envelope_scaling();

/// Grid points used by the suites above, exposed for tests.
std::vector<double> prop1_delta_grid();
std::vector<double> prop1_eps_grid(double delta);

} // namespace regret_lab
