#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "e2o/env/dataset.hpp"
#include "e2o/env/envs.hpp"
#include "e2o/nn/mlp.hpp"
#include "e2o/random.hpp"

namespace e2o::env {

/// Maps an obs_dim x B batch of observations to an act_dim x B batch of actions.
using BatchPolicy = std::function<nn::Matrix<float>(const nn::Matrix<float>& obs, Rng& rng)>;

BatchPolicy uniform_random_policy(int act_dim);

struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;
  std::vector<double> returns;
  std::uint64_t clamp_count = 0;
};

/// Runs `episodes` episodes in lockstep; episode i starts from
/// env_reset(spec, eval_seed + i). Returns undiscounted episode sums.
EvalResult run_episodes(const EnvSpec& spec, const BatchPolicy& policy, int episodes, std::uint64_t eval_seed);

/// Collects exactly `count` transitions from consecutive episodes
/// (episode i seeded with derive_seed(seed, i)). The final record is marked
/// truncated when the collection cuts an episode short.
std::vector<TransitionRecord> collect_transitions(const EnvSpec& spec, const BatchPolicy& policy, std::size_t count,
                                                  std::uint64_t seed);

}  // namespace e2o::env
