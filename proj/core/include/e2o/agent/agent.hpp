#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "e2o/agent/config.hpp"
#include "e2o/agent/ensemble.hpp"
#include "e2o/agent/policy.hpp"
#include "e2o/env/envs.hpp"
#include "e2o/nn/optim.hpp"
#include "e2o/random.hpp"
#include "e2o/replay/batch.hpp"

namespace e2o::agent {

struct QStats {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct CriticUpdateResult {
  std::vector<double> loss_per_critic;
  std::vector<double> cql_penalty_per_critic;
  QStats q_stats;
};

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double cql_penalty = 0.0;
  QStats q_stats;
};

/// Everything stored in an "E2OC" checkpoint.
struct CheckpointContents {
  Phase phase = Phase::offline;
  env::EnvId env_id = env::EnvId::pendulum;
  std::uint64_t architecture_hash = 0;
  int ensemble_size = 0;
  int obs_dim = 0;
  int act_dim = 0;
  nn::Mlp policy;
  nn::AdamState policy_optim;
  float log_alpha = 0.0f;
  nn::AdamState alpha_optim;
  QEnsemble ensemble;
};

/// Parses an "E2OC" checkpoint without reference to any config.
CheckpointContents parse_checkpoint(std::span<const std::uint8_t> bytes);

/// Soft actor-critic agent with an N-critic ensemble, optional CQL penalty,
/// SUNRISE-weighted backups and ensemble-based exploration.
class Agent {
 public:
  Agent(AgentConfig config, std::uint64_t init_seed);

  /// Rebuilds an agent from a checkpoint; the config must describe the same
  /// architecture (ensemble size, dims, hidden sizes).
  static Agent from_checkpoint(const CheckpointContents& contents, AgentConfig config);

  const AgentConfig& config() const { return config_; }
  /// Replaces hyperparameters; the architecture must not change.
  void reconfigure(AgentConfig config);

  Phase phase() const { return phase_; }
  void set_phase(Phase phase) { phase_ = phase; }

  double alpha() const;
  float log_alpha() const { return log_alpha_; }
  /// Fresh temperature (initial_alpha) with a fresh optimizer.
  void reset_temperature();

  /// One gradient step per critic toward ensemble-reduced TD targets,
  /// followed by a Polyak update of all target networks.
  CriticUpdateResult critic_update(const replay::Batch& batch, Rng& rng);

  /// One policy step; returns the actor loss and writes the batch mean log-prob.
  double actor_update(const nn::Matrix<float>& obs, Rng& rng, double& mean_log_prob);

  /// One step on log(alpha); returns the new alpha.
  double temperature_update(double mean_log_prob);

  /// critic_update, actor_update and temperature_update in that order.
  UpdateStats update(const replay::Batch& batch, Rng& rng);

  std::vector<float> act(std::span<const float> obs, Rng& rng, bool deterministic) const;

  /// Chooses the bootstrap head used by BootstrappedHeads for the next episode.
  void begin_episode(Rng& rng);
  int current_head() const { return current_head_; }

  /// Behaviour action for online interaction under the configured exploration mode.
  std::vector<float> select_exploration_action(std::span<const float> obs, Rng& rng) const;

  const SquashedGaussianPolicy& policy() const { return policy_; }
  SquashedGaussianPolicy& policy() { return policy_; }
  const QEnsemble& ensemble() const { return ensemble_; }
  QEnsemble& ensemble() { return ensemble_; }
  const nn::AdamState& policy_optim() const { return policy_optim_; }

  std::vector<std::uint8_t> save_checkpoint(env::EnvId env_id) const;

  friend bool operator==(const Agent&, const Agent&) = default;

 private:
  Agent() = default;

  nn::Matrix<float> single_column(std::span<const float> obs) const;
  std::vector<float> explore_oac(const nn::Matrix<float>& obs, Rng& rng) const;
  std::vector<float> explore_candidates(const nn::Matrix<float>& obs, Rng& rng) const;

  AgentConfig config_;
  Phase phase_ = Phase::offline;
  SquashedGaussianPolicy policy_;
  nn::AdamState policy_optim_;
  QEnsemble ensemble_;
  float log_alpha_ = 0.0f;
  nn::AdamState alpha_optim_;
  int current_head_ = 0;
};

}  // namespace e2o::agent
