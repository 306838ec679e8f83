#pragma once

#include <vector>

#include "e2o/agent/config.hpp"
#include "e2o/nn/mlp.hpp"
#include "e2o/nn/optim.hpp"
#include "e2o/random.hpp"

namespace e2o::agent {

/// N critics over (obs ++ action) with Polyak-averaged target copies.
/// Every loop over the ensemble runs in index order.
struct QEnsemble {
  std::vector<nn::Mlp> online;
  std::vector<nn::Mlp> target;
  std::vector<nn::AdamState> optim;

  static QEnsemble create(const AgentConfig& config, Rng& rng);

  int size() const { return static_cast<int>(online.size()); }

  /// Stacks observations over actions into critic inputs.
  static nn::Matrix<float> join(const nn::Matrix<float>& obs, const nn::Matrix<float>& actions);

  /// N x B matrix of Q-values.
  nn::Matrix<float> q_values(const nn::Matrix<float>& obs, const nn::Matrix<float>& actions,
                             bool use_target = false) const;

  void polyak(double tau);

  friend bool operator==(const QEnsemble&, const QEnsemble&) = default;
};

}  // namespace e2o::agent
