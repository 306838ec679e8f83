#pragma once

#include <cstdint>

#include "e2o/nn/mlp.hpp"

namespace e2o::replay {

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// A sampled minibatch laid out column-per-sample.
struct Batch {
  nn::Matrix<float> obs;       // obs_dim x B
  nn::Matrix<float> actions;   // act_dim x B
  nn::Matrix<float> next_obs;  // obs_dim x B
  nn::Vector<float> rewards;   // B
  nn::Vector<float> not_done;  // B; 0 only on genuine terminals
  MaskMatrix masks;            // N x B bootstrap masks

  Eigen::Index size() const { return obs.cols(); }
};

}  // namespace e2o::replay
