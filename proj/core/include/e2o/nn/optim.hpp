#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace e2o::nn {

struct AdamState {
  std::vector<float> first_moment;
  std::vector<float> second_moment;
  std::uint64_t step_count = 0;
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;

  static AdamState fresh(std::size_t param_count, float learning_rate);

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update applied in place.
void adam_step(std::span<float> params, std::span<const float> grads, AdamState& state);

/// target <- tau * online + (1 - tau) * target. Requires tau in (0, 1].
void polyak_update(std::span<float> target, std::span<const float> online, double tau);

/// Rescales `grads` so its L2 norm is at most `max_norm`; returns the norm before clipping.
/// A non-positive `max_norm` leaves the gradient untouched.
double clip_grad_norm(std::span<float> grads, double max_norm);

}  // namespace e2o::nn
