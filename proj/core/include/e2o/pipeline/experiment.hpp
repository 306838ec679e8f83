#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "e2o/env/dataset.hpp"
#include "e2o/pipeline/run_config.hpp"
#include "e2o/pipeline/training.hpp"

namespace e2o::pipeline {

/// File names inside an artifact directory.
namespace artifact {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kConfig = "run.cfg";
inline constexpr const char* kRunLog = "runlog.csv";
inline constexpr const char* kDataset = "dataset.e2od";
inline constexpr const char* kOfflineCheckpoint = "offline.e2oc";
inline constexpr const char* kOnlineCheckpoint = "online.e2oc";
inline constexpr const char* kLastGoodCheckpoint = "last_good.e2oc";
}  // namespace artifact

struct ExperimentResult {
  std::filesystem::path dir;
  bool ok = false;
  /// Stage that failed (dataset, offline, online) and its message.
  std::string failed_stage;
  std::string error;
  std::optional<OfflineResult> offline;
  std::optional<OnlineResult> online;
};

/// Trains the behaviour policies and writes a dataset of the configured kind.
env::Dataset generate_run_dataset(const RunConfig& config);

/// Loads the configured dataset, or generates one into the output directory
/// when no dataset path is given.
env::Dataset prepare_dataset(const RunConfig& config, std::filesystem::path& resolved_path);

/// Dataset -> offline pre-training -> online fine-tuning. Writes the run log,
/// both checkpoints and manifest.json into config.output_dir. Stage failures
/// are recorded in the manifest instead of being thrown.
ExperimentResult run_experiment(const RunConfig& config);

/// One artifact subdirectory `seed_<s>` per seed under config.output_dir. A
/// generated dataset is produced once at the sweep root and shared.
std::vector<ExperimentResult> run_sweep(const RunConfig& config, const std::vector<std::uint64_t>& seeds);

}  // namespace e2o::pipeline
