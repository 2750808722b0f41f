#pragma once

#include <string>

#include "thinfilm/sweep.hpp"

namespace thinfilm {

// Reads and validates an experiment config (JSON, schema documented in the
// README). Throws Error(invalid_config) with a human-readable message.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

}  // namespace thinfilm
