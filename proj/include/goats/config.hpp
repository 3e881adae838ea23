#pragma once

// Run configuration documents. The on-disk form is JSON with one object per
// section (run, env, sac, her, curriculum, goals, training). Missing keys
// keep their defaults; unknown keys are rejected.

#include <string>

#include "goats/trainer.hpp"

namespace goats {

/// Defaults for a container preset (environment geometry and goal regions).
RunConfig default_run_config(ContainerPreset preset = ContainerPreset::Bowl);

RunConfig run_config_from_string(const std::string& text);
std::string run_config_to_string(const RunConfig& config);

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& config, const std::string& path);

/// Name of the environment variable that overrides run.output_dir.
inline constexpr const char* kOutputDirEnv = "GOATS_OUTPUT_DIR";

}  // namespace goats
