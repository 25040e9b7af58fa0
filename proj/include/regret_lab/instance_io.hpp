#pragma once

// JSON serialization of instances:
//   {"kind": "bandit" | "two_state" | "tabular" | "finite_horizon",
//    "S": int, "A": int, "params": {...},
//    "transitions": [[[...]]]   (tabular, finite_horizon; S x A x S)
//    "rewards": [[...]]}        (tabular, finite_horizon; S x A)

#include "regret_lab/instance.hpp"

#include <filesystem>
#include <nlohmann/json.hpp>

namespace regret_lab {

nlohmann::json instance_to_json(const Instance& instance);
Instance instance_from_json(const nlohmann::json& j);

void save_instance(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

} // namespace regret_lab
