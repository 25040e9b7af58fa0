#pragma once

// Envelope checks of measured regret against the lower bounds, scaling
// sweeps in T and in the one-way diameter, and the formula-level
// verification suite.

#include "regret_lab/agents.hpp"
#include "regret_lab/info_bounds.hpp"
#include "regret_lab/sim_engine.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace regret_lab {

struct EnvelopeRow {
    std::string agent;
    double mean = 0.0;
    double ci_half_width = 0.0;
    std::int64_t runs = 0;
    /// mean + 3 ci < bound.
    bool falsified = false;
};

struct EnvelopeReport {
    std::string family;  // "bandit" or "two_state"
    int num_actions = 0;
    std::int64_t horizon = 0;
    TunedEpsilon eps;
    double bound = 0.0;
    /// Uniform-agent regret from the closed form (a lower bound for the gadget).
    double uninformed_closed_form = 0.0;
    bool closed_form_lower_bound_only = false;
    bool skipped = false;
    std::vector<std::string> notices;
    std::vector<EnvelopeRow> rows;

    bool passed() const;
};

struct EnvelopeOptions {
    std::int64_t runs = 0;
    std::uint64_t seed = 0;
    RegretMode mode = RegretMode::expected;
    int workers = 0;
};

/// eps tuned by optimal_epsilon_bandit; run r uses starred arm r % A.
EnvelopeReport envelope_check_bandit(const std::vector<AgentSpec>& agents, int A, std::int64_t T,
                                     double delta, const EnvelopeOptions& options);

/// eps tuned by optimal_epsilon_mdp; start state 0. Throws InfeasibleEpsilon
/// when the tuned eps is not below delta1.
EnvelopeReport envelope_check_mdp(const std::vector<AgentSpec>& agents, int A, std::int64_t T,
                                  double delta0, double delta1, const EnvelopeOptions& options);

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    /// Residual sums of squares with the slope fixed at 0.5 and at 1.0.
    double rss_sqrt = 0.0;
    double rss_linear = 0.0;
};

/// Least squares on (log x, log y). Needs at least two points, all positive.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingPoint {
    double x = 0.0;
    double eps = 0.0;
    double mean = 0.0;
    double ci_half_width = 0.0;
    /// Theoretical lower bound at this point.
    double bound = 0.0;
    /// sqrt and linear curves through the first measured point.
    double envelope_sqrt = 0.0;
    double envelope_linear = 0.0;
};

struct ScalingStudy {
    std::string sweep;  // "T" or "dow"
    std::string agent;
    std::vector<ScalingPoint> points;
    /// Grid points dropped as infeasible, with the reason.
    std::vector<std::string> notices;
    LogLogFit fit;
    /// Fit of the bound values alone.
    LogLogFit bound_fit;
    /// "sqrt" or "linear": whichever fixed-slope model has the smaller RSS.
    std::string closer_envelope;
};

struct ScalingOptions {
    std::int64_t runs = 0;
    std::uint64_t seed = 0;
    RegretMode mode = RegretMode::expected;
    int workers = 0;
    /// When set, eps stays fixed instead of being re-tuned per grid point.
    std::optional<double> fixed_eps;
};

ScalingStudy t_scaling(const AgentSpec& agent, int A, double delta, const std::vector<std::int64_t>& t_grid,
                       const ScalingOptions& options);

/// delta0 = 1 / D_ow per point; eps = optimal_epsilon_mdp at horizon T.
ScalingStudy dow_scaling_probe(const AgentSpec& agent, int A, double delta1,
                               const std::vector<double>& dow_grid, std::int64_t T,
                               const ScalingOptions& options);

/// Log-log slope of dow_scaling(delta1, .) over the grid.
double dow_envelope_slope(double delta1, const std::vector<double>& dow_grid);

/// |theta1 - gain of the gadget chain| <= 1e-10 over a 50-point grid.
GridCheck verify_theta1_grid();
/// optimal_gap > eps / (4 delta0) and matches the solved gain difference,
/// for delta0 >= delta1 and 0 < eps < delta1.
GridCheck verify_optimal_gap_grid();
/// One-way diameter 1/delta0 and diameter max(1/delta0, 1/delta1) within
/// 1e-9, and D >= D_ow.
GridCheck verify_diameter_grid();
/// Both forms of the D_ow envelope agree within 1e-12.
GridCheck verify_dow_identity();

/// Every formula-level check.
std::vector<GridCheck> verification_suite();

} // namespace regret_lab
