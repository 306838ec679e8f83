#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "e2o/agent/config.hpp"
#include "e2o/env/dataset.hpp"
#include "e2o/env/envs.hpp"

namespace e2o::pipeline {

/// Settings applied at the offline-to-online switch.
struct OnlineOverrides {
  double cql_alpha = 0.0;
  agent::TargetStrategy target_strategy = agent::TargetStrategy::WeightedMinPair;
  agent::Exploration exploration = agent::Exploration::SUNRISE_UCB;
  double sunrise_temperature = 20.0;
  /// The three values below fall back to the offline setting when 0.
  double initial_alpha = 0.0;
  double policy_lr = 0.0;
  double critic_lr = 0.0;
  /// Environment steps collected before the first online update; never below batch_size.
  std::uint64_t update_after = 0;
  friend bool operator==(const OnlineOverrides&, const OnlineOverrides&) = default;
};

/// Full description of one two-phase run.
struct RunConfig {
  agent::AgentConfig agent;
  OnlineOverrides online;
  env::EnvSpec env = env::make_spec(env::EnvId::pendulum);
  /// Empty: generate a dataset into the output directory.
  std::string dataset_path;
  env::DatasetKind dataset_kind = env::DatasetKind::medium;
  std::uint64_t dataset_size = 100000;
  std::uint64_t dataset_seed = 0;
  /// SAC steps for the behaviour-policy run; 0 selects the environment default.
  std::uint64_t reference_steps = 0;
  std::uint64_t offline_steps = 50000;
  std::uint64_t online_env_steps = 25000;
  std::uint64_t eval_interval = 2500;
  /// 0 reuses eval_interval.
  std::uint64_t online_eval_interval = 0;
  int eval_episodes = 10;
  std::uint64_t seed = 0;
  bool use_offline_data_online = false;
  /// 0 selects 0.8 for online BootstrappedHeads runs and 1.0 otherwise.
  double bootstrap_mask_prob = 0.0;
  std::string output_dir = "runs/e2o";

  std::uint64_t resolved_online_eval_interval() const {
    return online_eval_interval == 0 ? eval_interval : online_eval_interval;
  }
  double resolved_mask_prob(agent::Phase phase) const;
  /// Agent settings for the offline phase (dims filled from the env).
  agent::AgentConfig offline_agent_config() const;
  /// Agent settings after the switch.
  agent::AgentConfig online_agent_config() const;
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, repeated
/// keys and malformed values raise ConfigError naming the line.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical text form listing every key in a fixed order.
std::string to_text(const RunConfig& config);
/// Applies one `key = value` assignment.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);
std::vector<std::string> config_keys();

}  // namespace e2o::pipeline
