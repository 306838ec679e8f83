#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "e2o/agent/config.hpp"
#include "e2o/env/dataset.hpp"
#include "e2o/env/envs.hpp"
#include "e2o/env/rollout.hpp"
#include "e2o/nn/mlp.hpp"

namespace e2o::env {

/// Settings for the online SAC run that produces behaviour policies.
struct ReferenceTrainingConfig {
  std::uint64_t total_steps = 20000;
  std::uint64_t random_warmup_steps = 1000;
  std::uint64_t checkpoint_interval = 500;
  int checkpoint_eval_episodes = 10;
  int verify_eval_episodes = 20;
  /// Expert must beat the random policy by this fraction of |random return|.
  double min_improvement = 0.25;
  agent::AgentConfig agent;

  static ReferenceTrainingConfig defaults(const EnvSpec& spec);
};

struct PolicyCheckpoint {
  std::uint64_t step = 0;
  double eval_return = 0.0;
  nn::Mlp trunk;
};

struct ReferencePolicies {
  EnvId env_id = EnvId::pendulum;
  nn::Mlp medium;
  nn::Mlp expert;
  std::uint64_t medium_step = 0;
  std::uint64_t expert_step = 0;
  /// Every transition seen during training up to the medium checkpoint.
  std::vector<TransitionRecord> replay_trace;
  std::vector<std::pair<std::uint64_t, double>> learning_curve;
  /// Deterministic evaluations over verify_eval_episodes fresh episodes.
  double random_return = 0.0;
  double medium_return = 0.0;
  double expert_return = 0.0;
};

/// Online SAC (two critics, no conservative term) from scratch. The expert
/// is the best-evaluated checkpoint; the medium policy is the checkpoint
/// whose evaluation lies nearest the midpoint of random and expert returns.
ReferencePolicies train_reference_policies(const EnvSpec& spec, std::uint64_t seed,
                                           const ReferenceTrainingConfig& config);

inline constexpr int kReferenceScoreEpisodes = 100;

/// Stochastic behaviour policy backed by a SAC trunk.
BatchPolicy stochastic_policy(const nn::Mlp& trunk);
BatchPolicy deterministic_policy(const nn::Mlp& trunk);

/// Builds a dataset of the given kind. medium-replay ignores `size` and
/// stores the replay trace verbatim; medium-expert stores size/2 medium
/// records followed by size - size/2 expert records.
Dataset generate_dataset(DatasetKind kind, const EnvSpec& spec, std::uint64_t seed, std::size_t size,
                         const ReferencePolicies& refs);

}  // namespace e2o::env
