#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "e2o/agent/policy.hpp"
#include "e2o/env/dataset.hpp"
#include "e2o/random.hpp"

namespace e2o::agent {

/// Produces one action per column given the dataset observations and the
/// dataset's own actions (the latter lets reference policies replay the data).
using ActionSource =
    std::function<nn::Matrix<float>(const nn::Matrix<float>& obs, const nn::Matrix<float>& data_actions, Rng& rng)>;

ActionSource policy_action_source(const SquashedGaussianPolicy& policy);
ActionSource uniform_action_source(int act_dim);
ActionSource dataset_action_source();

inline constexpr int kActionDistanceBins = 20;

struct ActionDistanceResult {
  double mean_sq_dist = 0.0;
  /// kActionDistanceBins + 1 edges spanning [0, 4 * act_dim].
  std::vector<double> bin_edges;
  std::vector<std::uint64_t> counts;
  std::size_t samples = 0;
};

/// Monte-Carlo estimate of E ||a_hat - a||^2 over `sample_size` dataset
/// pairs drawn uniformly with replacement, one action from `source` each.
ActionDistanceResult action_distance(const ActionSource& source, const env::Dataset& dataset, std::size_t sample_size,
                                     Rng& rng);

std::vector<double> action_distance_bin_edges(int act_dim);

}  // namespace e2o::agent
