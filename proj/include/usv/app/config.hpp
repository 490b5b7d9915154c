#pragma once

// Plain "key: value" configuration files. Pipeline keys mirror the
// PipelineConfig field names, nested structs joined with a dot
// (e.g. "cluster.tolerance", "tracker.max_misses"). Scenario files use the
// same syntax with one "[boat]" block per actor.

#include "usv/pipeline.hpp"
#include "usv/sim.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace usv::app {

struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

struct ConfigSection {
    std::string name;  // empty for the top-level section
    std::vector<KeyValue> entries;
};

/// Splits text into sections. '#' starts a comment. Throws ErrorCode::parse.
std::vector<ConfigSection> parse_sections(std::string_view text);

/// Unknown keys and malformed values throw ErrorCode::configuration; the
/// result is validated before it is returned.
fusion::PipelineConfig parse_pipeline_config(std::string_view text);
fusion::PipelineConfig load_pipeline_config(const std::string& path);
std::string write_pipeline_config(const fusion::PipelineConfig& config);

sim::ScenarioConfig parse_scenario_config(std::string_view text);
sim::ScenarioConfig load_scenario_config(const std::string& path);
std::string write_scenario_config(const sim::ScenarioConfig& config);

std::string read_text_file(const std::string& path);

}  // namespace usv::app
