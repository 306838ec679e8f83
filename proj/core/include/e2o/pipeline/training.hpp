#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "e2o/agent/agent.hpp"
#include "e2o/env/dataset.hpp"
#include "e2o/env/rollout.hpp"
#include "e2o/errors.hpp"
#include "e2o/pipeline/run_config.hpp"
#include "e2o/pipeline/run_log.hpp"

namespace e2o::pipeline {

/// Deterministic-policy rollouts over `episodes` consecutive seeds from eval_seed.
env::EvalResult evaluate(const agent::SquashedGaussianPolicy& policy, const env::EnvSpec& spec, int episodes,
                         std::uint64_t eval_seed);

inline constexpr std::size_t kQProbeSize = 10000;

/// Fixed seeded subsample of dataset (obs, action) pairs used to track
/// average ensemble Q-values across a run.
struct QProbe {
  nn::Matrix<float> obs;
  nn::Matrix<float> actions;

  static QProbe from_dataset(const env::Dataset& dataset, std::size_t size, std::uint64_t seed);
  struct Reading {
    double mean_q = 0.0;
    double mean_std = 0.0;
  };
  Reading measure(const agent::QEnsemble& ensemble) const;
};

/// Independent random streams of one run, all derived from the run seed.
struct RunSeeds {
  std::uint64_t init = 0;
  std::uint64_t offline = 0;
  std::uint64_t online = 0;
  std::uint64_t eval = 0;
  std::uint64_t probe = 0;
  std::uint64_t episodes = 0;
  static RunSeeds from(std::uint64_t seed);
};

/// Raised when training hits a non-finite value; carries the most recent
/// checkpoint taken at an evaluation point.
class TrainingError : public DiagnosticError {
 public:
  TrainingError(const std::string& what, std::vector<std::uint8_t> last_good)
      : DiagnosticError(what), last_good_checkpoint(std::move(last_good)) {}
  std::vector<std::uint8_t> last_good_checkpoint;
};

struct OfflineResult {
  std::vector<std::uint8_t> checkpoint;
  env::EvalResult final_eval;
};

struct OnlineResult {
  std::vector<std::uint8_t> checkpoint;
  /// Evaluation of the loaded agent before any online update.
  env::EvalResult handoff_eval;
  env::EvalResult final_eval;
  std::size_t buffer_size = 0;
  /// Whether the dataset's first record is present in the final online buffer.
  bool buffer_holds_dataset_sentinel = false;
};

/// Eval steps of a phase: multiples of `interval` plus the final step.
std::vector<std::uint64_t> eval_schedule(std::uint64_t total, std::uint64_t interval);

/// CQL-N pre-training on the dataset only. Appends offline rows to `log`.
OfflineResult train_offline(const RunConfig& config, const env::Dataset& dataset, RunLog& log);

/// Loads an offline checkpoint, applies the online overrides with a fresh
/// temperature and fine-tunes by interacting with the environment.
OnlineResult train_online(const RunConfig& config, const env::Dataset& dataset,
                          std::span<const std::uint8_t> offline_checkpoint, RunLog& log);

}  // namespace e2o::pipeline
