// Acceptance criteria 1-12. One PASS/FAIL line per criterion; the exit
// status is nonzero when any criterion fails.

#include "oracles.hpp"

#include "regret_lab/cli.hpp"
#include "regret_lab/enumeration.hpp"
#include "regret_lab/exact_mdp.hpp"
#include "regret_lab/experiments.hpp"
#include "regret_lab/info_bounds.hpp"
#include "regret_lab/instance_io.hpp"
#include "regret_lab/sim_engine.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace regret_lab;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

constexpr std::uint64_t kSeed = 20260101;

Outcome prop1_grid() {
    const auto start = std::chrono::steady_clock::now();
    const auto check = verify_prop1_grid();
    const double t = seconds_since(start);
    return {check.passed() && t < 1.0,
            std::to_string(check.violations) + " violations over " + std::to_string(check.grid_size) +
                " points in " + fmt(t) + " s"};
}

Outcome theta1_consistency() {
    const auto start = std::chrono::steady_clock::now();
    const auto theta = verify_theta1_grid();
    const auto gap = verify_optimal_gap_grid();
    const double t = seconds_since(start);
    return {theta.passed() && gap.passed() && theta.grid_size == 50 && t < 1.0,
            "theta1 " + std::to_string(theta.violations) + "/" + std::to_string(theta.grid_size) +
                " violations, gap inequality " + std::to_string(gap.violations) + "/" +
                std::to_string(gap.grid_size) + ", " + fmt(t) + " s"};
}

Outcome diameters() {
    int bad = 0;
    double worst = 0.0;
    for (double d0 : {0.025, 0.05, 0.1, 0.2})
        for (double d1 : {0.1, 0.3}) {
            const auto m = to_tabular(make_two_state_mdp(2, d0, d1, d1 / 2, 1));
            const double dow = one_way_diameter(m).value;
            const double d = diameter(m);
            const double e1 = std::abs(dow - 1.0 / d0);
            const double e2 = std::abs(d - std::max(1.0 / d0, 1.0 / d1));
            worst = std::max({worst, e1, e2});
            if (e1 > 1e-9 || e2 > 1e-9 || d < dow) ++bad;
        }
    return {bad == 0, std::to_string(bad) + " failing points, max error " + fmt(worst)};
}

Outcome uninformed_regret_oracle() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& spec : default_roster()) {
        const auto agent = make_agent(spec, 1, 2);
        for (std::int64_t T = 2; T <= 6; ++T)
            worst = std::max(worst, std::abs(exhaustive_uninformed_regret(*agent, 2, 0.25, 0.1, T) - 0.1 * T * 0.5));
    }
    const double t = seconds_since(start);
    return {worst <= 1e-12 && t < 60.0, "max |exact - eps T (1 - 1/A)| = " + fmt(worst) + " in " + fmt(t) + " s"};
}

Outcome kl_budget_oracle() {
    int violations = 0;
    int cases = 0;
    double min_slack = 1e9;
    for (const char* name : {"egreedy:explore=0", "ucb1", "optimistic"}) {
        const auto agent = make_agent(parse_agent_spec(name), 1, 2);
        for (std::int64_t T = 2; T <= 6; ++T) {
            const auto r = trajectory_kl_exact(*agent, 0.25, 0.1, 2, T);
            ++cases;
            if (!r.within_budget || !r.pinsker_holds) ++violations;
            min_slack = std::min(min_slack, r.pinsker_rhs - (r.informed_fraction - r.uninformed_fraction));
        }
    }
    return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(cases) +
                                 " cases, min Pinsker slack " + fmt(min_slack)};
}

Outcome symmetry() {
    std::string detail;
    bool ok = true;
    for (int A : {2, 4})
        for (const auto& spec : default_roster()) {
            const auto r = symmetry_average(spec, A, 0.25, optimal_epsilon_bandit(0.25, A, 500).value, 500, 10000,
                                            kSeed);
            const double z = std::abs(r.mean_fraction - 1.0 / A) / r.standard_error;
            if (!(z <= 3.0)) {
                ok = false;
                detail += spec.kind + " A=" + std::to_string(A) + " z=" + fmt(z) + "; ";
            }
        }
    return {ok, ok ? "all roster agents within 3 standard errors at A in {2, 4}" : detail};
}

Outcome bandit_envelope() {
    bool ok = true;
    std::string detail;
    for (int A : {2, 4}) {
        EnvelopeOptions options;
        options.runs = 10000;
        options.seed = kSeed;
        const auto report = envelope_check_bandit(default_roster(), A, 2000, 0.25, options);
        ok = ok && report.passed() && !report.skipped;
        double lowest = 1e9;
        for (const auto& row : report.rows) lowest = std::min(lowest, row.mean - 3 * row.ci_half_width);
        detail += "A=" + std::to_string(A) + " bound " + fmt(report.bound) + " min(mean - 3ci) " + fmt(lowest) + "; ";
    }
    return {ok, detail};
}

Outcome mdp_envelope() {
    EnvelopeOptions options;
    options.runs = 10000;
    options.seed = kSeed;
    const auto report = envelope_check_mdp(mdp_roster(), 2, 10000, 0.1, 0.1, options);
    double lowest = 1e9;
    std::string names;
    for (const auto& row : report.rows) {
        lowest = std::min(lowest, row.mean - 3 * row.ci_half_width);
        names += row.agent + " ";
    }
    return {report.passed() && !report.skipped,
            "eps " + fmt(report.eps.value) + " bound " + fmt(report.bound) + " min(mean - 3ci) " + fmt(lowest) +
                " over " + names};
}

Outcome t_scaling_fit() {
    ScalingOptions options;
    options.runs = 2000;
    options.seed = kSeed;
    const std::vector<std::int64_t> grid{500, 1000, 2000, 4000, 8000};
    const auto uniform = t_scaling(parse_agent_spec("uniform"), 2, 0.25, grid, options);
    const auto ucb = t_scaling(parse_agent_spec("ucb1"), 2, 0.25, grid, options);
    const bool ok = std::abs(uniform.fit.slope - 0.5) <= 0.02 && ucb.fit.slope >= 0.4 && ucb.fit.slope <= 0.6;
    return {ok, "uniform slope " + fmt(uniform.fit.slope) + ", ucb1 slope " + fmt(ucb.fit.slope) + " +/- " +
                    fmt(ucb.fit.slope_stderr)};
}

Outcome dow_algebra() {
    const auto identity = verify_dow_identity();
    const std::vector<double> grid{5, 10, 20, 40};
    bool ordered = true;
    double last = 1.0;
    std::string slopes;
    for (double d1 : {0.1, 0.3, 1.0}) {
        const double s = dow_envelope_slope(d1, grid);
        slopes += fmt(s) + " ";
        if (!(s > 0.5 && s < 1.0 && s < last)) ordered = false;
        last = s;
    }
    // Bound values themselves, not just the helper.
    std::vector<double> bound;
    for (double d : grid) bound.push_back(mdp_lower_bound(1.0 / d, 0.3, 2, 10000));
    const bool consistent = std::abs(fit_loglog(grid, bound).slope - dow_envelope_slope(0.3, grid)) <= 1e-12;
    return {identity.passed() && ordered && consistent,
            "identity " + std::to_string(identity.violations) + "/" + std::to_string(identity.grid_size) +
                " violations, slopes by delta1 {0.1, 0.3, 1}: " + slopes};
}

Outcome backward_induction_oracle() {
    double worst = 0.0;
    int cases = 0;
    for (int S = 1; S <= 3; ++S)
        for (int A = 1; A <= 3; ++A)
            for (int H = 1; H <= 4; ++H)
                for (std::uint32_t rep = 0; rep < 2; ++rep) {
                    const auto m = oracle::random_mdp(S, A, static_cast<std::uint32_t>(1000 * rep + 100 * S + 10 * A + H));
                    const auto v = backward_induction(finite_horizon(m, H, std::vector<double>(S, 1.0 / S)));
                    const auto ref = oracle::brute_force_finite_horizon(m, H);
                    for (int s = 0; s < S; ++s) worst = std::max(worst, std::abs(v.v_at(0, s) - ref[s]));
                    ++cases;
                }
    const auto g = to_tabular(make_two_state_mdp(2, 0.2, 0.2, 0.1, 1));
    const double hand = backward_induction(finite_horizon(g, 2, {1.0, 0.0})).v_at(0, 1);
    const double hand_ref = oracle::brute_force_finite_horizon(g, 2)[1];
    return {worst <= 1e-12 && std::abs(hand - 1.9) <= 1e-12 && std::abs(hand_ref - 1.9) <= 1e-12,
            std::to_string(cases) + " random cases, max error " + fmt(worst) + ", V(1) = " + fmt(hand)};
}

std::string cli_output(std::vector<std::string> args) {
    args.insert(args.begin(), "regret-lab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out;
    std::ostringstream err;
    const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::to_string(status) + "\n" + out.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome reproducibility() {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "regret_lab_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto bandit = (dir / "bandit.json").string();
    const auto gadget = (dir / "gadget.json").string();
    save_instance(make_hard_bandit(2, 0.25, 0.2, 1), bandit);
    save_instance(make_two_state_mdp(2, 0.1, 0.1, 0.02, 0), gadget);

    bool ok = true;
    int compared = 0;
    for (const auto& [inst, agent] : std::vector<std::pair<std::string, std::string>>{
             {bandit, "ucb1"}, {bandit, "psrl"}, {gadget, "optimistic"}, {gadget, "psrl"}}) {
        std::string first;
        for (const char* workers : {"1", "2", "5"}) {
            const auto out = cli_output({"simulate", "--instance", inst, "--agent", agent, "--T", "2000", "--runs",
                                         "40", "--seed", "7", "--coupled", "--t-grid", "100,1000,2000", "--workers",
                                         workers});
            if (first.empty()) first = out;
            ok = ok && out == first && out.rfind("0\n", 0) == 0;
            ++compared;
        }
    }
    std::string first_points;
    for (const char* workers : {"1", "3"}) {
        const auto out_dir = (dir / (std::string("scaling") + workers)).string();
        cli_output({"scaling", "--sweep", "dow", "--agent", "psrl", "--delta1", "0.3", "--grid", "5,10", "--T",
                    "3000", "--runs", "20", "--seed", "9", "--workers", workers, "--out", out_dir});
        const auto points = slurp(fs::path(out_dir) / "points.csv") + slurp(fs::path(out_dir) / "summary.json");
        if (first_points.empty()) first_points = points;
        ok = ok && points == first_points && !points.empty();
        ++compared;
    }
    return {ok, std::to_string(compared) + " repeated invocations compared byte for byte"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 kl bound grid", prop1_grid},
        {"2 theta1 and optimal gap", theta1_consistency},
        {"3 diameters", diameters},
        {"4 uninformed regret equality (enumeration)", uninformed_regret_oracle},
        {"5 kl budget and Pinsker (enumeration)", kl_budget_oracle},
        {"6 starred-position symmetry", symmetry},
        {"7 bandit envelope", bandit_envelope},
        {"8 two-state envelope", mdp_envelope},
        {"9 T scaling slopes", t_scaling_fit},
        {"10 D_ow envelope algebra", dow_algebra},
        {"11 backward induction vs enumeration", backward_induction_oracle},
        {"12 reproducibility across workers", reproducibility},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.passed) ++failures;
        std::printf("%s criterion %s: %s (%.1f s)\n", outcome.passed ? "PASS" : "FAIL", name.c_str(),
                    outcome.detail.c_str(), seconds_since(start));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
