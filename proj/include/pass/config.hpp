#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "pass/simlab.hpp"

namespace pass::config {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

// Experiment + optional sweep grid + optional stream section, one JSON
// document. Unknown keys are rejected so typos fail loudly.
simlab::ExperimentConfig experiment_from_json(const nlohmann::json& doc);
nlohmann::json experiment_to_json(const simlab::ExperimentConfig& cfg);

bool has_sweep(const nlohmann::json& doc);
std::vector<simlab::SweepCell> sweep_cells_from_json(const nlohmann::json& doc);

// Built-in configurations: table1-subset, table2-subset, branin-demo.
nlohmann::json preset_config(std::string_view name);

nlohmann::json load_config_file(const std::string& path);

}  // namespace pass::config
