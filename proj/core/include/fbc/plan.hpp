#pragma once

#include "fbc/experiment.hpp"
#include "fbc/simgen.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace fbc {

enum class ConfigFormat { Toml, Json };

/// Format from the file extension: `.json` is JSON, anything else TOML.
ConfigFormat config_format(const std::filesystem::path& path);

/// Benchmark plan. Parse and validation errors are ParameterError messages of
/// the form `source:line: ...` (syntax) or `source: field: ...` (content).
ExperimentPlan parse_plan(std::string_view text, ConfigFormat format, std::string_view source = "<plan>");
ExperimentPlan load_plan(const std::filesystem::path& path);

/// Single scenario for `simulate`; either `label = "RSDN"` plus overrides or
/// the four factors spelled out.
ScenarioConfig parse_scenario_config(std::string_view text, ConfigFormat format, std::string_view source = "<scenario>");
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// JSON object echoing every field of the config.
std::string scenario_config_json(const ScenarioConfig& config);

}  // namespace fbc
