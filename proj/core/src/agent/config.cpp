#include "e2o/agent/config.hpp"

#include <cmath>

#include "e2o/errors.hpp"

namespace e2o::agent {

std::string to_string(TargetStrategy s) {
  switch (s) {
    case TargetStrategy::MinQ:
      return "MinQ";
    case TargetStrategy::MeanQ:
      return "MeanQ";
    case TargetStrategy::REM:
      return "REM";
    case TargetStrategy::RandomMinPair:
      return "RandomMinPair";
    case TargetStrategy::WeightedMinPair:
      return "WeightedMinPair";
  }
  throw ConfigError("invalid target strategy");
}

std::string to_string(Exploration e) {
  switch (e) {
    case Exploration::None:
      return "None";
    case Exploration::BootstrappedHeads:
      return "BootstrappedHeads";
    case Exploration::OAC:
      return "OAC";
    case Exploration::SUNRISE_UCB:
      return "SUNRISE_UCB";
  }
  throw ConfigError("invalid exploration mode");
}

std::string to_string(Phase p) { return p == Phase::offline ? "offline" : "online"; }

TargetStrategy parse_target_strategy(std::string_view name) {
  for (auto s : kAllTargetStrategies) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown target strategy '" + std::string(name) + "'");
}

Exploration parse_exploration(std::string_view name) {
  for (auto e : kAllExplorations) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("unknown exploration mode '" + std::string(name) + "'");
}

void AgentConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("agent config: ") + what);
  };
  require(obs_dim > 0 && act_dim > 0, "obs_dim and act_dim must be positive");
  require(!hidden_sizes.empty(), "at least one hidden layer is required");
  for (int h : hidden_sizes) require(h > 0, "hidden sizes must be positive");
  require(ensemble_size >= 2, "ensemble_size must be at least 2");
  require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  require(policy_lr > 0.0 && critic_lr > 0.0 && alpha_lr > 0.0, "learning rates must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(!target_entropy || std::isfinite(*target_entropy), "target_entropy must be finite");
  require(initial_alpha > 0.0, "initial_alpha must be positive");
  require(cql_alpha >= 0.0, "cql_alpha must be non-negative");
  require(cql_num_sampled_actions >= 1, "cql_num_sampled_actions must be at least 1");
  require(sunrise_temperature >= 0.0, "sunrise_temperature must be non-negative");
  require(ucb_lambda >= 0.0, "ucb_lambda must be non-negative");
  require(ucb_num_candidates >= 1, "ucb_num_candidates must be at least 1");
  require(oac_delta >= 0.0, "oac_delta must be non-negative");
  require(updates_per_env_step >= 1, "updates_per_env_step must be at least 1");
  require(max_grad_norm >= 0.0, "max_grad_norm must be non-negative");
  require(static_cast<unsigned>(target_strategy) <= static_cast<unsigned>(TargetStrategy::WeightedMinPair),
          "invalid target strategy");
  require(static_cast<unsigned>(exploration) <= static_cast<unsigned>(Exploration::SUNRISE_UCB),
          "invalid exploration mode");
}

std::uint64_t AgentConfig::architecture_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(obs_dim));
  mix(static_cast<std::uint64_t>(act_dim));
  mix(static_cast<std::uint64_t>(ensemble_size));
  mix(hidden_sizes.size());
  for (int s : hidden_sizes) mix(static_cast<std::uint64_t>(s));
  return h;
}

}  // namespace e2o::agent
