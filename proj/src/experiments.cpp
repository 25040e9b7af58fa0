#include "regret_lab/experiments.hpp"

#include "regret_lab/errors.hpp"
#include "regret_lab/exact_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace regret_lab {

bool EnvelopeReport::passed() const {
    return std::none_of(rows.begin(), rows.end(), [](const EnvelopeRow& r) { return r.falsified; });
}

namespace {

std::int64_t round_up_to_multiple(std::int64_t runs, int A) {
    return ((runs + A - 1) / A) * A;
}

void fill_rows(EnvelopeReport& report, const std::vector<AgentSpec>& agents,
               const std::vector<Environment>& family, const EnvelopeOptions& options) {
    BatchOptions batch;
    batch.horizon = report.horizon;
    batch.runs = round_up_to_multiple(options.runs, report.num_actions);
    batch.seed = options.seed;
    batch.mode = options.mode;
    batch.workers = options.workers;
    for (const auto& spec : agents) {
        const auto curve = expected_regret_mc(spec, family, batch);
        EnvelopeRow row;
        row.agent = spec.to_string();
        row.mean = curve.mean.back();
        row.ci_half_width = curve.ci_half_width.back();
        row.runs = curve.runs;
        row.falsified = row.mean + 3.0 * row.ci_half_width < report.bound;
        report.rows.push_back(row);
    }
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double fixed_slope_rss(const std::vector<double>& lx, const std::vector<double>& ly, double slope) {
    std::vector<double> shifted(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) shifted[i] = ly[i] - slope * lx[i];
    const double intercept = mean_of(shifted);
    double rss = 0.0;
    for (double s : shifted) rss += (s - intercept) * (s - intercept);
    return rss;
}

void finish_study(ScalingStudy& study) {
    if (study.points.empty()) return;
    const auto& first = study.points.front();
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> b;
    for (auto& p : study.points) {
        p.envelope_sqrt = first.mean * std::sqrt(p.x / first.x);
        p.envelope_linear = first.mean * (p.x / first.x);
        x.push_back(p.x);
        y.push_back(p.mean);
        b.push_back(p.bound);
    }
    if (study.points.size() >= 2) {
        if (std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; })) {
            study.fit = fit_loglog(x, y);
            study.closer_envelope = study.fit.rss_sqrt <= study.fit.rss_linear ? "sqrt" : "linear";
        } else {
            study.notices.push_back("non-positive mean regret; log-log fit skipped");
        }
        study.bound_fit = fit_loglog(x, b);
    }
}

} // namespace

EnvelopeReport envelope_check_bandit(const std::vector<AgentSpec>& agents, int A, std::int64_t T,
                                     double delta, const EnvelopeOptions& options) {
    EnvelopeReport report;
    report.family = "bandit";
    report.num_actions = A;
    report.horizon = T;
    report.eps = optimal_epsilon_bandit(delta, A, T);
    report.bound = bandit_lower_bound(A, T, delta);
    if (report.eps.clamped) report.notices.push_back(report.eps.warning);
    if (report.eps.value == 0.0) {
        report.skipped = true;
        report.notices.push_back("eps = 0: every arm is optimal, regret is 0; check skipped");
        return report;
    }
    const auto bandit = make_hard_bandit(A, delta, report.eps.value, 0);
    report.uninformed_closed_form = uninformed_regret_closed_form(bandit, T).value;
    fill_rows(report, agents, starred_family(bandit), options);
    return report;
}

EnvelopeReport envelope_check_mdp(const std::vector<AgentSpec>& agents, int A, std::int64_t T,
                                  double delta0, double delta1, const EnvelopeOptions& options) {
    EnvelopeReport report;
    report.family = "two_state";
    report.num_actions = A;
    report.horizon = T;
    const double th = theta1(delta0, delta1);
    report.eps = optimal_epsilon_mdp(delta1, th, A, T);
    if (report.eps.clamped)
        throw InfeasibleEpsilon("tuned eps " + std::to_string(report.eps.unclamped) +
                                " is not below delta1 = " + std::to_string(delta1) + "; increase T");
    report.bound = mdp_lower_bound(delta0, delta1, A, T);
    if (delta0 < delta1)
        report.notices.push_back("delta0 < delta1: the gap bound eps / (4 delta0) assumes delta0 >= delta1 "
                                 "and is not applied");
    if (report.eps.value == 0.0) {
        report.skipped = true;
        report.notices.push_back("eps = 0: every action is optimal, regret is 0; check skipped");
        return report;
    }
    const auto gadget = make_two_state_mdp(A, delta0, delta1, report.eps.value, 0);
    const auto closed = uninformed_regret_closed_form(gadget, T);
    report.uninformed_closed_form = closed.value;
    report.closed_form_lower_bound_only = closed.lower_bound_only;
    fill_rows(report, agents, starred_family(gadget, 0), options);
    return report;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit_loglog needs >= 2 paired points");
    std::vector<double> lx(x.size());
    std::vector<double> ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw ParameterError("fit_loglog needs positive values");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    const double mx = mean_of(lx);
    const double my = mean_of(ly);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw ParameterError("fit_loglog needs distinct x values");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        rss += r * r;
    }
    fit.slope_stderr = lx.size() > 2 ? std::sqrt(rss / static_cast<double>(lx.size() - 2) / sxx) : 0.0;
    fit.rss_sqrt = fixed_slope_rss(lx, ly, 0.5);
    fit.rss_linear = fixed_slope_rss(lx, ly, 1.0);
    return fit;
}

ScalingStudy t_scaling(const AgentSpec& agent, int A, double delta, const std::vector<std::int64_t>& t_grid,
                       const ScalingOptions& options) {
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) ||
        std::adjacent_find(t_grid.begin(), t_grid.end()) != t_grid.end())
        throw ParameterError("T grid must be strictly increasing");
    ScalingStudy study;
    study.sweep = "T";
    study.agent = agent.to_string();
    for (std::int64_t T : t_grid) {
        double eps = 0.0;
        if (options.fixed_eps) {
            eps = *options.fixed_eps;
        } else {
            const auto tuned = optimal_epsilon_bandit(delta, A, T);
            if (tuned.clamped) study.notices.push_back("T = " + std::to_string(T) + ": " + tuned.warning);
            eps = tuned.value;
        }
        const auto family = starred_family(make_hard_bandit(A, delta, eps, 0));
        BatchOptions batch;
        batch.horizon = T;
        batch.runs = round_up_to_multiple(options.runs, A);
        batch.seed = options.seed;
        batch.mode = options.mode;
        batch.workers = options.workers;
        const auto curve = expected_regret_mc(agent, family, batch);
        ScalingPoint p;
        p.x = static_cast<double>(T);
        p.eps = eps;
        p.mean = curve.mean.back();
        p.ci_half_width = curve.ci_half_width.back();
        p.bound = bandit_lower_bound(A, T, delta);
        study.points.push_back(p);
    }
    finish_study(study);
    return study;
}

ScalingStudy dow_scaling_probe(const AgentSpec& agent, int A, double delta1,
                               const std::vector<double>& dow_grid, std::int64_t T,
                               const ScalingOptions& options) {
    if (!std::is_sorted(dow_grid.begin(), dow_grid.end()) ||
        std::adjacent_find(dow_grid.begin(), dow_grid.end()) != dow_grid.end())
        throw ParameterError("D_ow grid must be strictly increasing");
    ScalingStudy study;
    study.sweep = "dow";
    study.agent = agent.to_string();
    for (double dow : dow_grid) {
        const std::string where = "D_ow = " + std::to_string(dow) + ": ";
        if (!(dow >= 1.0)) {
            study.notices.push_back(where + "delta0 = 1 / D_ow must lie in (0, 1]");
            continue;
        }
        const double delta0 = 1.0 / dow;
        double eps = 0.0;
        if (options.fixed_eps) {
            eps = *options.fixed_eps;
        } else {
            const auto tuned = optimal_epsilon_mdp(delta1, theta1(delta0, delta1), A, T);
            if (tuned.clamped) {
                study.notices.push_back(where + "tuned eps is not below delta1; point skipped (increase T)");
                continue;
            }
            eps = tuned.value;
        }
        if (!(eps < delta1)) {
            study.notices.push_back(where + "eps must be below delta1; point skipped");
            continue;
        }
        if (delta0 < delta1) study.notices.push_back(where + "delta0 < delta1; gap bound not applied");
        const auto family = starred_family(make_two_state_mdp(A, delta0, delta1, eps, 0), 0);
        BatchOptions batch;
        batch.horizon = T;
        batch.runs = round_up_to_multiple(options.runs, A);
        batch.seed = options.seed;
        batch.mode = options.mode;
        batch.workers = options.workers;
        const auto curve = expected_regret_mc(agent, family, batch);
        ScalingPoint p;
        p.x = dow;
        p.eps = eps;
        p.mean = curve.mean.back();
        p.ci_half_width = curve.ci_half_width.back();
        p.bound = mdp_lower_bound(delta0, delta1, A, T);
        study.points.push_back(p);
    }
    finish_study(study);
    return study;
}

double dow_envelope_slope(double delta1, const std::vector<double>& dow_grid) {
    std::vector<double> values;
    for (double d : dow_grid) values.push_back(dow_scaling(delta1, d));
    return fit_loglog(dow_grid, values).slope;
}

GridCheck verify_theta1_grid() {
    GridCheck check{"theta1_consistency"};
    for (int i = 1; i <= 10; ++i)
        for (int j = 1; j <= 5; ++j) {
            const double d0 = 0.05 * i;
            const double d1 = 0.15 * j;
            const auto mdp = to_tabular(make_two_state_mdp(2, d0, d1, 0.0, 0));
            const double gain = average_reward(mdp, {0, 0})[0];
            check.record(BoundReport::compare(std::abs(theta1(d0, d1) - gain), 1e-10));
        }
    return check;
}

GridCheck verify_optimal_gap_grid() {
    GridCheck check{"optimal_gap"};
    for (double d0 : {0.1, 0.2, 0.3, 0.5, 0.8})
        for (double d1 : {0.05, 0.1, 0.2, 0.3, 0.5}) {
            if (d0 < d1) continue;
            for (double frac : {0.1, 0.25, 0.5, 0.75, 0.95}) {
                const double eps = frac * d1;
                const double gap = optimal_gap(d0, d1, eps);
                check.record(BoundReport::compare(eps / (4.0 * d0), gap));
                if (!(gap > eps / (4.0 * d0))) ++check.violations;
                const auto mdp = to_tabular(make_two_state_mdp(2, d0, d1, eps, 1));
                const double solved =
                    optimal_average_reward_policy(mdp).gain - average_reward(mdp, {0, 0})[0];
                check.record(BoundReport::compare(std::abs(solved - gap), 1e-10));
            }
        }
    return check;
}

GridCheck verify_diameter_grid() {
    GridCheck check{"diameters"};
    for (double d0 : {0.025, 0.05, 0.1, 0.2})
        for (double d1 : {0.1, 0.3}) {
            const auto mdp = to_tabular(make_two_state_mdp(2, d0, d1, d1 / 2.0, 1));
            const double dow = one_way_diameter(mdp).value;
            const double d = diameter(mdp);
            check.record(BoundReport::compare(std::abs(dow - 1.0 / d0), 1e-9));
            check.record(BoundReport::compare(std::abs(d - std::max(1.0 / d0, 1.0 / d1)), 1e-9));
            check.record(BoundReport::compare(dow, d));
        }
    return check;
}

GridCheck verify_dow_identity() {
    GridCheck check{"dow_identity"};
    for (double d1 : {0.1, 0.3, 1.0})
        for (double dow : {5.0, 10.0, 20.0, 40.0})
            check.record(BoundReport::compare(
                std::abs(dow_scaling(d1, dow) - dow_scaling_product_form(d1, dow)), 1e-12));
    return check;
}

std::vector<GridCheck> verification_suite() {
    return {verify_prop1_grid(),       verify_kl_nonnegativity_grid(), verify_pinsker_corpus(),
            verify_envelope_scaling(), verify_theta1_grid(),           verify_optimal_gap_grid(),
            verify_diameter_grid(),    verify_dow_identity()};
}

} // namespace regret_lab
