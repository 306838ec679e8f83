#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace e2o::agent {

enum class TargetStrategy : std::uint8_t { MinQ, MeanQ, REM, RandomMinPair, WeightedMinPair };
enum class Exploration : std::uint8_t { None, BootstrappedHeads, OAC, SUNRISE_UCB };

/// Offline: CQL penalty active, actor maximizes min over the ensemble.
/// Online: no penalty, actor maximizes the ensemble mean.
enum class Phase : std::uint8_t { offline = 0, online = 1 };

std::string to_string(TargetStrategy s);
std::string to_string(Exploration e);
std::string to_string(Phase p);
TargetStrategy parse_target_strategy(std::string_view name);
Exploration parse_exploration(std::string_view name);

inline constexpr TargetStrategy kAllTargetStrategies[] = {TargetStrategy::MinQ, TargetStrategy::MeanQ,
                                                          TargetStrategy::REM, TargetStrategy::RandomMinPair,
                                                          TargetStrategy::WeightedMinPair};
inline constexpr Exploration kAllExplorations[] = {Exploration::None, Exploration::BootstrappedHeads,
                                                   Exploration::OAC, Exploration::SUNRISE_UCB};

struct AgentConfig {
  int obs_dim = 0;
  int act_dim = 0;
  std::vector<int> hidden_sizes{256, 256};

  int ensemble_size = 10;
  double gamma = 0.99;
  double tau = 0.005;
  double policy_lr = 3e-5;
  double critic_lr = 3e-4;
  double alpha_lr = 1e-4;
  int batch_size = 256;
  /// Defaults to -act_dim when unset.
  std::optional<double> target_entropy;
  double initial_alpha = 1.0;

  double cql_alpha = 5.0;
  int cql_num_sampled_actions = 10;

  TargetStrategy target_strategy = TargetStrategy::MinQ;
  Exploration exploration = Exploration::None;
  /// SUNRISE backup temperature; 0 makes every weight exactly 1.
  double sunrise_temperature = 0.0;
  double ucb_lambda = 1.0;
  int ucb_num_candidates = 10;
  double oac_delta = 1.0;
  int updates_per_env_step = 1;
  /// Global L2 clip per network update; 0 disables clipping.
  double max_grad_norm = 0.0;

  double resolved_target_entropy() const { return target_entropy.value_or(-static_cast<double>(act_dim)); }

  /// Throws ConfigError on any out-of-range value.
  void validate() const;

  /// Hash of the fields that fix network shapes (dims, hidden sizes, ensemble size).
  std::uint64_t architecture_hash() const;

  friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

}  // namespace e2o::agent
