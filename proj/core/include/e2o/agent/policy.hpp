#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "e2o/nn/mlp.hpp"
#include "e2o/random.hpp"

namespace e2o::agent {

/// tanh-squashed diagonal Gaussian policy. The trunk maps observations to
/// (mean, log_std) per action dimension; log_std is clamped to [-20, 2].
class SquashedGaussianPolicy {
 public:
  struct Sample {
    nn::Matrix<float> actions;    // act_dim x B
    nn::Vector<float> log_probs;  // empty for deterministic samples
  };

  SquashedGaussianPolicy() = default;
  SquashedGaussianPolicy(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& rng);
  explicit SquashedGaussianPolicy(nn::Mlp trunk);

  int obs_dim() const { return trunk_.input_dim(); }
  int act_dim() const { return trunk_.output_dim() / 2; }

  nn::Mlp& trunk() { return trunk_; }
  const nn::Mlp& trunk() const { return trunk_; }

  /// Deterministic: tanh(mean), no log-probabilities. Otherwise a
  /// reparameterized sample with the exact squashed log-density.
  Sample sample(const nn::Matrix<float>& obs, Rng& rng, bool deterministic) const;

  /// Sample using caller-supplied standard-normal noise (act_dim x B).
  Sample sample_with_noise(const nn::Matrix<float>& obs, const nn::Matrix<float>& noise) const;

  nn::Matrix<float> deterministic_actions(const nn::Matrix<float>& obs) const;

  nn::Vector<float> log_prob(const nn::Matrix<float>& obs, const nn::Matrix<float>& actions) const;

  friend bool operator==(const SquashedGaussianPolicy&, const SquashedGaussianPolicy&) = default;

 private:
  nn::Mlp trunk_;
};

/// Single-observation convenience form; log_prob is empty when deterministic.
std::pair<std::vector<float>, std::optional<float>> sample_action(const SquashedGaussianPolicy& policy,
                                                                  std::span<const float> obs, Rng& rng,
                                                                  bool deterministic);

nn::Matrix<float> standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace e2o::agent
