#include "regret_lab/cli.hpp"

#include "regret_lab/enumeration.hpp"
#include "regret_lab/errors.hpp"
#include "regret_lab/exact_mdp.hpp"
#include "regret_lab/experiments.hpp"
#include "regret_lab/info_bounds.hpp"
#include "regret_lab/instance_io.hpp"
#include "regret_lab/sim_engine.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace regret_lab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot open " + path.string() + " for writing");
    file << text;
    if (!file) throw ConfigError("failed writing " + path.string());
}

void prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("--out: cannot create " + dir + ": " + ec.message());
}

void write_manifest(const std::string& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& artifacts) {
    json manifest;
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["config"] = config;
    manifest["artifacts"] = artifacts;
    write_text(fs::path(dir) / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<std::int64_t> parse_int_list(const std::string& text, const char* field) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::int64_t v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw ConfigError(std::string(field) + ": '" + item + "' is not an integer");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(std::string(field) + ": empty list");
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const char* field) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc() || res.ptr != item.data() + item.size())
            throw ConfigError(std::string(field) + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(std::string(field) + ": empty list");
    return out;
}

json to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        }
        rows.push_back(row);
    }
    return rows;
}

json report_json(const MdpReport& r) {
    json j;
    j["policy"] = r.policy;
    j["lambda"] = r.lambda;
    j["stationary"] = r.stationary;
    j["bias"] = r.bias;
    j["hitting_times"] = to_json(r.hitting_times);
    j["diameter"] = r.diameter ? json(*r.diameter) : json(nullptr);
    j["one_way_diameter"] = r.one_way_diameter ? json(*r.one_way_diameter) : json(nullptr);
    j["reference_state"] = r.reference_state;
    return j;
}

json grid_json(const GridCheck& c) {
    return {{"check", c.check_name},   {"grid_size", c.grid_size}, {"violations", c.violations},
            {"max_slack", c.max_slack}, {"min_slack", c.min_slack}, {"passed", c.passed()}};
}

void warn_default_seed(const CLI::App& sub, std::ostream& err) {
    if (sub.count("--seed") == 0) err << "warning: using default seed 0; pass --seed for studies\n";
}

// ---------------------------------------------------------------------------

struct MakeArgs {
    std::string kind = "bandit";
    int actions = 2;
    int states = 2;
    double delta = 0.25;
    double eps = 0.05;
    double delta0 = 0.1;
    double delta1 = 0.1;
    int starred = 0;
    std::uint64_t seed = 0;
    int horizon = 0;
    std::string output;
};

int cmd_make(const MakeArgs& a, std::ostream& out) {
    Instance instance;
    if (a.kind == "bandit") {
        instance = make_hard_bandit(a.actions, a.delta, a.eps, a.starred);
    } else if (a.kind == "two_state") {
        instance = make_two_state_mdp(a.actions, a.delta0, a.delta1, a.eps, a.starred);
    } else if (a.kind == "concat") {
        const auto gadget = make_two_state_mdp(a.actions, a.delta0, a.delta1, a.eps, a.starred);
        instance = concat_copies(gadget, a.states, a.seed);
    } else if (a.kind == "finite_horizon") {
        if (a.horizon < 1) throw ConfigError("--H: finite_horizon needs H >= 1");
        const auto gadget = to_tabular(make_two_state_mdp(a.actions, a.delta0, a.delta1, a.eps, a.starred));
        instance = finite_horizon(gadget, a.horizon, {1.0, 0.0});
    } else {
        throw ConfigError("--kind: expected bandit, two_state, concat or finite_horizon");
    }
    if (a.output.empty()) {
        out << instance_to_json(instance).dump(2) << "\n";
    } else {
        save_instance(instance, a.output);
    }
    return 0;
}

int cmd_analyze(const std::string& path, const std::string& policy_text, const std::string& out_dir,
                std::ostream& out) {
    const Instance instance = load_instance(path);
    json j;
    j["kind"] = instance_kind(instance);
    if (const auto* fh = std::get_if<FiniteHorizonMdp>(&instance)) {
        const auto values = backward_induction(*fh);
        j["horizon"] = values.horizon;
        j["v"] = values.v;
        j["policy"] = values.policy;
    } else {
        std::optional<DeterministicPolicy> mu;
        if (!policy_text.empty()) {
            DeterministicPolicy p;
            for (auto v : parse_int_list(policy_text, "--policy")) p.push_back(static_cast<int>(v));
            mu = p;
        }
        j["report"] = report_json(analyze(to_tabular(instance), mu));
    }
    const std::string text = j.dump(2) + "\n";
    if (out_dir.empty()) {
        out << text;
    } else {
        prepare_out_dir(out_dir);
        write_text(fs::path(out_dir) / "report.json", text);
        write_manifest(out_dir, "analyze", {{"instance", path}, {"policy", policy_text}}, {"report.json"});
    }
    return 0;
}

int cmd_verify(const std::string& out_dir, std::ostream& out) {
    bool ok = true;
    json checks = json::array();
    for (const auto& c : verification_suite()) {
        out << (c.passed() ? "PASS " : "FAIL ") << c.check_name << ": " << c.violations << " violations over "
            << c.grid_size << " points, min slack " << format_double(c.min_slack) << "\n";
        ok = ok && c.passed();
        checks.push_back(grid_json(c));
    }
    if (!out_dir.empty()) {
        prepare_out_dir(out_dir);
        write_text(fs::path(out_dir) / "verify.json", json{{"checks", checks}, {"passed", ok}}.dump(2) + "\n");
        write_manifest(out_dir, "verify", json::object(), {"verify.json"});
    }
    return ok ? 0 : 1;
}

struct SimulateArgs {
    std::string instance;
    std::string agent = "uniform";
    std::int64_t horizon = 1000;
    std::int64_t runs = 100;
    std::uint64_t seed = 0;
    std::string mode = "expected";
    bool coupled = false;
    bool average_starred = false;
    std::string t_grid;
    int start_state = 0;
    int workers = 0;
    std::string out_dir;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    const Instance instance = load_instance(a.instance);
    const auto spec = parse_agent_spec(a.agent);
    std::vector<Environment> envs;
    if (a.average_starred)
        envs = starred_family(instance, a.start_state);
    else
        envs.push_back(make_environment(instance, a.start_state));

    BatchOptions options;
    options.horizon = a.horizon;
    options.runs = a.runs;
    options.seed = a.seed;
    options.mode = parse_regret_mode(a.mode);
    options.coupled = a.coupled;
    options.workers = a.workers;
    if (!a.t_grid.empty()) options.t_grid = parse_int_list(a.t_grid, "--t-grid");
    else options.t_grid = {a.horizon};
    std::sort(options.t_grid.begin(), options.t_grid.end());
    options.t_grid.erase(std::unique(options.t_grid.begin(), options.t_grid.end()), options.t_grid.end());

    const auto records = simulate_batch(spec, envs, options);

    std::string csv = "run,t_grid,cum_regret,n_star,n_star_uninformed\n";
    for (std::size_t r = 0; r < records.size(); ++r)
        for (std::size_t k = 0; k < options.t_grid.size(); ++k) {
            csv += std::to_string(r) + "," + std::to_string(options.t_grid[k]) + "," +
                   format_double(records[r].cum_regret[k]) + "," + std::to_string(records[r].n_star[k]) + ",";
            if (!records[r].n_star_uninformed.empty()) csv += std::to_string(records[r].n_star_uninformed[k]);
            csv += "\n";
        }

    if (options.runs >= 2) {
        const auto curve = summarize(records, options.t_grid, options.mode, spec.to_string());
        err << spec.to_string() << " T=" << options.t_grid.back() << ": mean regret "
            << format_double(curve.mean.back()) << " +/- " << format_double(curve.ci_half_width.back())
            << " over " << curve.runs << " runs\n";
    }

    if (a.out_dir.empty()) {
        out << csv;
    } else {
        prepare_out_dir(a.out_dir);
        write_text(fs::path(a.out_dir) / "simulate.csv", csv);
        json config = {{"instance", a.instance}, {"agent", spec.to_string()}, {"T", a.horizon},
                       {"runs", a.runs},         {"seed", a.seed},          {"mode", a.mode},
                       {"coupled", a.coupled},   {"average_starred", a.average_starred},
                       {"t_grid", options.t_grid}, {"start_state", a.start_state}};
        write_manifest(a.out_dir, "simulate", config, {"simulate.csv"});
    }
    return 0;
}

struct OracleArgs {
    int actions = 2;
    std::int64_t t_min = 2;
    std::int64_t t_max = 6;
    double delta = 0.25;
    double eps = 0.1;
    std::string out_dir;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
    bool ok = true;
    json rows = json::array();
    const double expected_factor = 1.0 - 1.0 / a.actions;
    for (const auto& spec : default_roster()) {
        const auto agent = make_agent(spec, 1, a.actions);
        for (std::int64_t T = a.t_min; T <= a.t_max; ++T) {
            const double exact = exhaustive_uninformed_regret(*agent, a.actions, a.delta, a.eps, T);
            const double closed = a.eps * static_cast<double>(T) * expected_factor;
            const bool closed_form_ok = std::abs(exact - closed) <= 1e-12;
            const auto kl = trajectory_kl_exact(*agent, a.delta, a.eps, a.actions, T);
            const bool info = kl.within_budget && kl.pinsker_holds;
            ok = ok && closed_form_ok && info;
            out << (closed_form_ok && info ? "PASS " : "FAIL ") << spec.kind << " T=" << T << ": uninformed regret "
                << format_double(exact) << " vs " << format_double(closed) << ", kl "
                << format_double(kl.kl.nats) << " <= " << format_double(kl.budget.nats) << ", pull gap "
                << format_double(kl.informed_fraction - kl.uninformed_fraction) << " <= "
                << format_double(kl.pinsker_rhs) << "\n";
            rows.push_back({{"agent", spec.to_string()},
                            {"T", T},
                            {"uninformed_regret", exact},
                            {"closed_form", closed},
                            {"kl", kl.kl.nats},
                            {"reward_sequence_kl", kl.reward_sequence_kl.nats},
                            {"budget", kl.budget.nats},
                            {"star_weighted", kl.star_weighted},
                            {"nonstar_weighted", kl.nonstar_weighted},
                            {"informed_fraction", kl.informed_fraction},
                            {"uninformed_fraction", kl.uninformed_fraction},
                            {"pinsker_rhs", kl.pinsker_rhs},
                            {"passed", closed_form_ok && info}});
        }
    }
    if (!a.out_dir.empty()) {
        prepare_out_dir(a.out_dir);
        write_text(fs::path(a.out_dir) / "oracle.json", json{{"rows", rows}, {"passed", ok}}.dump(2) + "\n");
        write_manifest(a.out_dir, "oracle",
                       {{"A", a.actions}, {"T_min", a.t_min}, {"T_max", a.t_max}, {"delta", a.delta}, {"eps", a.eps}},
                       {"oracle.json"});
    }
    return ok ? 0 : 1;
}

struct ScalingArgs {
    std::string sweep = "T";
    std::string agent = "uniform";
    int actions = 2;
    double delta = 0.25;
    double delta1 = 0.3;
    std::string grid;
    std::int64_t horizon = 10000;
    std::int64_t runs = 200;
    std::uint64_t seed = 0;
    std::string mode = "expected";
    std::optional<double> fixed_eps;
    int workers = 0;
    std::string out_dir;
};

int cmd_scaling(const ScalingArgs& a, std::ostream& out, std::ostream& err) {
    const auto spec = parse_agent_spec(a.agent);
    ScalingOptions options;
    options.runs = a.runs;
    options.seed = a.seed;
    options.mode = parse_regret_mode(a.mode);
    options.workers = a.workers;
    options.fixed_eps = a.fixed_eps;
    ScalingStudy study;
    if (a.sweep == "T") {
        const auto grid = a.grid.empty() ? std::vector<std::int64_t>{500, 1000, 2000, 4000, 8000}
                                         : parse_int_list(a.grid, "--grid");
        study = t_scaling(spec, a.actions, a.delta, grid, options);
    } else if (a.sweep == "dow") {
        const auto grid = a.grid.empty() ? std::vector<double>{5, 10, 20, 40} : parse_double_list(a.grid, "--grid");
        study = dow_scaling_probe(spec, a.actions, a.delta1, grid, a.horizon, options);
    } else {
        throw ConfigError("--sweep: expected T or dow");
    }
    for (const auto& n : study.notices) err << "notice: " << n << "\n";

    std::string csv = "x,mean,ci,envelope_sqrt,envelope_linear\n";
    for (const auto& p : study.points)
        csv += format_double(p.x) + "," + format_double(p.mean) + "," + format_double(p.ci_half_width) + "," +
               format_double(p.envelope_sqrt) + "," + format_double(p.envelope_linear) + "\n";
    json summary = {{"sweep", study.sweep},
                    {"agent", study.agent},
                    {"slope", study.fit.slope},
                    {"stderr", study.fit.slope_stderr},
                    {"intercept", study.fit.intercept},
                    {"rss_sqrt", study.fit.rss_sqrt},
                    {"rss_linear", study.fit.rss_linear},
                    {"closer_envelope", study.closer_envelope},
                    {"bound_slope", study.bound_fit.slope},
                    {"notices", study.notices}};
    out << study.agent << " " << study.sweep << "-sweep: slope " << format_double(study.fit.slope) << " +/- "
        << format_double(study.fit.slope_stderr) << ", closer envelope " << study.closer_envelope << "\n";
    if (!a.out_dir.empty()) {
        prepare_out_dir(a.out_dir);
        write_text(fs::path(a.out_dir) / "points.csv", csv);
        write_text(fs::path(a.out_dir) / "summary.json", summary.dump(2) + "\n");
        json config = {{"sweep", a.sweep}, {"agent", spec.to_string()}, {"A", a.actions},
                       {"delta", a.delta}, {"delta1", a.delta1},        {"grid", a.grid},
                       {"T", a.horizon},   {"runs", a.runs},            {"seed", a.seed},
                       {"mode", a.mode},   {"fixed_eps", a.fixed_eps ? json(*a.fixed_eps) : json(nullptr)}};
        write_manifest(a.out_dir, "scaling", config, {"points.csv", "summary.json"});
    } else {
        out << csv;
    }
    return 0;
}

} // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lower-bound regret laboratory for bandits and average-reward MDPs", "regret-lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    MakeArgs make_args;
    auto* make = app.add_subcommand("make", "Write a hard instance as JSON");
    make->add_option("--kind", make_args.kind, "bandit | two_state | concat | finite_horizon");
    make->add_option("--A", make_args.actions, "Number of actions")->check(CLI::PositiveNumber);
    make->add_option("--S", make_args.states, "States for concat")->check(CLI::PositiveNumber);
    make->add_option("--delta", make_args.delta, "Base arm mean");
    make->add_option("--eps", make_args.eps, "Gap of the starred action");
    make->add_option("--delta0", make_args.delta0, "Gadget low-to-high probability");
    make->add_option("--delta1", make_args.delta1, "Gadget high-to-low probability");
    make->add_option("--starred", make_args.starred, "Starred action (zero-based)");
    make->add_option("--seed", make_args.seed, "Seed for per-copy starred actions");
    make->add_option("--H", make_args.horizon, "Episode length for finite_horizon");
    make->add_option("-o,--output", make_args.output, "Output file (default stdout)");

    std::string analyze_path;
    std::string analyze_policy;
    std::string analyze_out;
    auto* analyze_cmd = app.add_subcommand("analyze", "Exact gain, bias, hitting times and diameters");
    analyze_cmd->add_option("instance", analyze_path, "Instance JSON")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--policy", analyze_policy, "Comma-separated action per state");
    analyze_cmd->add_option("--out", analyze_out, "Artifact directory");

    std::string verify_out;
    auto* verify = app.add_subcommand("verify", "Formula-level verification suites");
    verify->add_option("--out", verify_out, "Artifact directory");

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo regret runs");
    simulate_cmd->add_option("--instance", sim.instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--agent", sim.agent, "kind[:key=value,...]");
    simulate_cmd->add_option("--T", sim.horizon, "Horizon")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--runs", sim.runs, "Number of runs")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", sim.seed, "64-bit seed");
    simulate_cmd->add_option("--mode", sim.mode, "expected | realized");
    simulate_cmd->add_flag("--coupled", sim.coupled, "Also run the uninformed branch");
    simulate_cmd->add_flag("--average-starred", sim.average_starred, "Cycle the starred action over runs");
    simulate_cmd->add_option("--t-grid", sim.t_grid, "Comma-separated checkpoints (default T)");
    simulate_cmd->add_option("--start-state", sim.start_state, "Initial state");
    simulate_cmd->add_option("--workers", sim.workers, "Worker threads (default REGRET_LAB_THREADS)");
    simulate_cmd->add_option("--out", sim.out_dir, "Artifact directory (default CSV on stdout)");

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle", "Exact enumeration checks on tiny bandits");
    oracle->add_option("--A", oracle_args.actions, "Arms (<= 3)");
    oracle->add_option("--T-min", oracle_args.t_min, "Smallest horizon");
    oracle->add_option("--T-max", oracle_args.t_max, "Largest horizon (<= 10)");
    oracle->add_option("--delta", oracle_args.delta, "Base mean");
    oracle->add_option("--eps", oracle_args.eps, "Gap");
    oracle->add_option("--out", oracle_args.out_dir, "Artifact directory");

    ScalingArgs sc;
    auto* scaling = app.add_subcommand("scaling", "Regret scaling sweeps in T or D_ow");
    scaling->add_option("--sweep", sc.sweep, "T | dow");
    scaling->add_option("--agent", sc.agent, "kind[:key=value,...]");
    scaling->add_option("--A", sc.actions, "Number of actions");
    scaling->add_option("--delta", sc.delta, "Bandit base mean (T sweep)");
    scaling->add_option("--delta1", sc.delta1, "Gadget delta1 (dow sweep)");
    scaling->add_option("--grid", sc.grid, "Comma-separated grid");
    scaling->add_option("--T", sc.horizon, "Horizon (dow sweep)");
    scaling->add_option("--runs", sc.runs, "Runs per grid point")->check(CLI::PositiveNumber);
    scaling->add_option("--seed", sc.seed, "64-bit seed");
    scaling->add_option("--mode", sc.mode, "expected | realized");
    scaling->add_option("--fixed-eps", sc.fixed_eps, "Keep eps fixed across the grid");
    scaling->add_option("--workers", sc.workers, "Worker threads (default REGRET_LAB_THREADS)");
    scaling->add_option("--out", sc.out_dir, "Artifact directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*make) return cmd_make(make_args, out);
        if (*analyze_cmd) return cmd_analyze(analyze_path, analyze_policy, analyze_out, out);
        if (*verify) return cmd_verify(verify_out, out);
        if (*simulate_cmd) {
            warn_default_seed(*simulate_cmd, err);
            return cmd_simulate(sim, out, err);
        }
        if (*oracle) return cmd_oracle(oracle_args, out);
        if (*scaling) {
            warn_default_seed(*scaling, err);
            return cmd_scaling(sc, out, err);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace regret_lab
