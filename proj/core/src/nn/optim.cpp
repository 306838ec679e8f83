#include "e2o/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "e2o/errors.hpp"

namespace e2o::nn {

AdamState AdamState::fresh(std::size_t param_count, float learning_rate) {
  if (!(learning_rate > 0.0f)) throw ConfigError("learning rate must be positive");
  AdamState s;
  s.first_moment.assign(param_count, 0.0f);
  s.second_moment.assign(param_count, 0.0f);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size()) {
    throw ShapeError("adam: params (" + std::to_string(params.size()) + "), grads (" + std::to_string(grads.size()) +
                     ") and moments (" + std::to_string(state.first_moment.size()) + ") must have equal length");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const float bc1 = static_cast<float>(1.0 - std::pow(static_cast<double>(state.beta1), t));
  const float bc2 = static_cast<float>(1.0 - std::pow(static_cast<double>(state.beta2), t));
  const float step = state.learning_rate / bc1;
  const float sqrt_bc2 = std::sqrt(bc2);
  float* m = state.first_moment.data();
  float* v = state.second_moment.data();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const float g = grads[i];
    m[i] = state.beta1 * m[i] + (1.0f - state.beta1) * g;
    v[i] = state.beta2 * v[i] + (1.0f - state.beta2) * g * g;
    params[i] -= step * m[i] / (std::sqrt(v[i]) / sqrt_bc2 + state.epsilon);
  }
}

void polyak_update(std::span<float> target, std::span<const float> online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("polyak tau must lie in (0, 1], got " + std::to_string(tau));
  if (target.size() != online.size()) throw ShapeError("polyak: target and online lengths differ");
  if (tau == 1.0) {
    std::copy(online.begin(), online.end(), target.begin());
    return;
  }
  const float a = static_cast<float>(tau);
  const float b = static_cast<float>(1.0 - tau);
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = a * online[i] + b * target[i];
}

double clip_grad_norm(std::span<float> grads, double max_norm) {
  double sq = 0.0;
  for (float g : grads) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const float scale = static_cast<float>(max_norm / norm);
    for (float& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace e2o::nn
