#include "e2o/agent/action_distance.hpp"

#include <algorithm>

#include "e2o/errors.hpp"

namespace e2o::agent {

ActionSource policy_action_source(const SquashedGaussianPolicy& policy) {
  return [policy](const nn::Matrix<float>& obs, const nn::Matrix<float>&, Rng& rng) {
    return policy.sample(obs, rng, false).actions;
  };
}

ActionSource uniform_action_source(int act_dim) {
  return [act_dim](const nn::Matrix<float>& obs, const nn::Matrix<float>&, Rng& rng) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    nn::Matrix<float> a(act_dim, obs.cols());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = u(rng);
    }
    return a;
  };
}

ActionSource dataset_action_source() {
  return [](const nn::Matrix<float>&, const nn::Matrix<float>& data_actions, Rng&) { return data_actions; };
}

std::vector<double> action_distance_bin_edges(int act_dim) {
  std::vector<double> edges(kActionDistanceBins + 1);
  const double top = 4.0 * act_dim;
  for (int i = 0; i <= kActionDistanceBins; ++i) edges[i] = top * i / kActionDistanceBins;
  return edges;
}

ActionDistanceResult action_distance(const ActionSource& source, const env::Dataset& dataset, std::size_t sample_size,
                                     Rng& rng) {
  if (dataset.records.empty()) throw StateError("action_distance needs a non-empty dataset");
  if (sample_size == 0) throw ConfigError("action_distance sample size must be positive");
  const auto& first = dataset.records.front();
  const auto obs_dim = static_cast<Eigen::Index>(first.obs.size());
  const auto act_dim = static_cast<Eigen::Index>(first.action.size());
  const auto n = static_cast<Eigen::Index>(sample_size);

  nn::Matrix<float> obs(obs_dim, n);
  nn::Matrix<float> data_actions(act_dim, n);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.records.size() - 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& rec = dataset.records[pick(rng)];
    for (Eigen::Index i = 0; i < obs_dim; ++i) obs(i, j) = rec.obs[i];
    for (Eigen::Index i = 0; i < act_dim; ++i) data_actions(i, j) = rec.action[i];
  }
  const nn::Matrix<float> actions = source(obs, data_actions, rng);
  if (actions.rows() != act_dim || actions.cols() != n) {
    throw ShapeError("action source returned a batch of the wrong shape");
  }

  ActionDistanceResult out;
  out.bin_edges = action_distance_bin_edges(static_cast<int>(act_dim));
  out.counts.assign(kActionDistanceBins, 0);
  out.samples = sample_size;
  const double top = out.bin_edges.back();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = 0.0;
    for (Eigen::Index i = 0; i < act_dim; ++i) {
      const double diff = static_cast<double>(actions(i, j)) - data_actions(i, j);
      d += diff * diff;
    }
    sum += d;
    const int bin = std::min(kActionDistanceBins - 1, static_cast<int>(d / top * kActionDistanceBins));
    out.counts[bin] += 1;
  }
  out.mean_sq_dist = sum / static_cast<double>(n);
  return out;
}

}  // namespace e2o::agent
