#pragma once

// JSON run configuration for the `train` command.
//
//   {
//     "schema_version": 1,
//     "traces": "traces/",                      // directory of canonical-JSON traces
//     "validation_traces": "val/",              // optional; otherwise split from "traces"
//     "split": {"train_ratio": 0.8, "val_ratio": 0.2, "seed": 0},
//     "manifests": ["video.json"],              // optional; otherwise "manifest_synth"
//     "manifest_synth": {...},
//     "train": {... TrainConfig, with nested "agent" and "session" ...}
//   }
//
// Relative paths resolve against the configuration file's directory.
// Unknown keys and wrongly typed values are rejected before anything runs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "tiyuntsong/selfplay.hpp"
#include "tiyuntsong/workload.hpp"

namespace tiyuntsong {

inline constexpr int kRunConfigSchemaVersion = 1;

struct RunConfig {
  TrainConfig train;
  std::filesystem::path traces;
  std::optional<std::filesystem::path> validation_traces;
  double train_ratio = 0.8;
  double val_ratio = 0.2;
  std::uint64_t split_seed = 0;
  std::vector<std::filesystem::path> manifests;
  ManifestSynthConfig manifest_synth;
};

/// Checks structure and types; throws ValidationError naming the offending key.
void validate_run_config_json(const nlohmann::json& j);

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Loads traces and manifests and applies the train/validation split.
TrainData load_train_data(const RunConfig& cfg);

}  // namespace tiyuntsong
