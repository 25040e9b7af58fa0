#include "regret_lab/instance_io.hpp"

#include "regret_lab/errors.hpp"

#include <fstream>

namespace regret_lab {

using nlohmann::json;

namespace {

json tensor_to_json(const TabularMdp& mdp) {
    json out = json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        json by_action = json::array();
        for (int a = 0; a < mdp.num_actions(); ++a) {
            const auto row = mdp.row(s, a);
            by_action.push_back(std::vector<double>(row.begin(), row.end()));
        }
        out.push_back(std::move(by_action));
    }
    return out;
}

json rewards_to_json(const TabularMdp& mdp) {
    json out = json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        std::vector<double> row;
        for (int a = 0; a < mdp.num_actions(); ++a) row.push_back(mdp.reward(s, a));
        out.push_back(std::move(row));
    }
    return out;
}

template <typename T>
T required(const json& j, const char* key, const char* where) {
    if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + ": field '" + key + "' has the wrong type (" +
                          e.what() + ")");
    }
}

TabularMdp tabular_from_json(const json& j) {
    const int S = required<int>(j, "S", "instance");
    const int A = required<int>(j, "A", "instance");
    const auto tensor = required<std::vector<std::vector<std::vector<double>>>>(j, "transitions",
                                                                                 "instance");
    const auto rewards = required<std::vector<std::vector<double>>>(j, "rewards", "instance");
    if (static_cast<int>(tensor.size()) != S || static_cast<int>(rewards.size()) != S)
        throw ConfigError("instance: transitions/rewards must have S rows");
    std::vector<double> flat_p;
    std::vector<double> flat_r;
    for (int s = 0; s < S; ++s) {
        if (static_cast<int>(tensor[s].size()) != A || static_cast<int>(rewards[s].size()) != A)
            throw ConfigError("instance: each state needs A action entries");
        for (int a = 0; a < A; ++a) {
            if (static_cast<int>(tensor[s][a].size()) != S)
                throw ConfigError("instance: each transition row needs S entries");
            flat_p.insert(flat_p.end(), tensor[s][a].begin(), tensor[s][a].end());
            flat_r.push_back(rewards[s][a]);
        }
    }
    return TabularMdp(S, A, std::move(flat_p), std::move(flat_r));
}

} // namespace

json instance_to_json(const Instance& instance) {
    json j;
    j["kind"] = instance_kind(instance);
    std::visit(
        [&](const auto& inst) {
            using T = std::decay_t<decltype(inst)>;
            if constexpr (std::is_same_v<T, BanditInstance>) {
                j["S"] = 1;
                j["A"] = inst.num_arms;
                j["params"] = {{"delta", inst.base},
                               {"eps", inst.gap},
                               {"starred", inst.starred_arm},
                               {"means", inst.means}};
            } else if constexpr (std::is_same_v<T, TwoStateMdpInstance>) {
                j["S"] = 2;
                j["A"] = inst.num_actions;
                j["params"] = {{"delta0", inst.delta0},
                               {"delta1", inst.delta1},
                               {"eps", inst.gap},
                               {"starred", inst.starred_arm}};
            } else if constexpr (std::is_same_v<T, TabularMdp>) {
                j["S"] = inst.num_states();
                j["A"] = inst.num_actions();
                j["params"] = json::object();
                j["transitions"] = tensor_to_json(inst);
                j["rewards"] = rewards_to_json(inst);
            } else {
                j["S"] = inst.base.num_states();
                j["A"] = inst.base.num_actions();
                j["params"] = {{"H", inst.horizon}, {"rho", inst.initial_distribution}};
                j["transitions"] = tensor_to_json(inst.base);
                j["rewards"] = rewards_to_json(inst.base);
            }
        },
        instance);
    return j;
}

Instance instance_from_json(const json& j) {
    const auto kind = required<std::string>(j, "kind", "instance");
    if (kind == "bandit") {
        const json params = required<json>(j, "params", "instance");
        const int A = required<int>(j, "A", "instance");
        const auto delta = required<double>(params, "delta", "params");
        const auto eps = required<double>(params, "eps", "params");
        const auto starred = required<int>(params, "starred", "params");
        BanditInstance b = make_hard_bandit(A, delta, eps, starred);
        if (params.contains("means")) {
            const auto means = params.at("means").get<std::vector<double>>();
            if (means != b.means)
                throw ConfigError("params: 'means' disagrees with (delta, eps, starred)");
        }
        return b;
    }
    if (kind == "two_state") {
        const json params = required<json>(j, "params", "instance");
        return make_two_state_mdp(required<int>(j, "A", "instance"),
                                  required<double>(params, "delta0", "params"),
                                  required<double>(params, "delta1", "params"),
                                  required<double>(params, "eps", "params"),
                                  required<int>(params, "starred", "params"));
    }
    if (kind == "tabular") return tabular_from_json(j);
    if (kind == "finite_horizon") {
        const json params = required<json>(j, "params", "instance");
        return finite_horizon(tabular_from_json(j), required<int>(params, "H", "params"),
                              required<std::vector<double>>(params, "rho", "params"));
    }
    throw ConfigError("instance: unknown kind '" + kind + "'");
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    out << instance_to_json(instance).dump(2) << '\n';
    if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open instance file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("instance file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return instance_from_json(j);
}

} // namespace regret_lab
