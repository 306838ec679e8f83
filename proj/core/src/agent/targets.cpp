#include "e2o/agent/targets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "e2o/errors.hpp"

namespace e2o::agent {

std::vector<double> rem_weights(std::size_t n, Rng& rng) {
  if (n == 0) throw ConfigError("REM needs at least one value");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) {
    x = u(rng);
    sum += x;
  }
  if (sum <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
    return w;
  }
  for (auto& x : w) x /= sum;
  return w;
}

double weighted_min_pair(std::span<const double> q) {
  const std::size_t n = q.size();
  if (n < 2) throw ConfigError("WeightedMinPair needs at least two values");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sum += std::min(q[i], q[j]);
  }
  return sum / static_cast<double>(n * (n - 1) / 2);
}

double reduce_target(std::span<const double> q, TargetStrategy strategy, Rng& rng) {
  const std::size_t n = q.size();
  if (n < 2) throw ConfigError("reduce_target needs an ensemble of at least 2, got " + std::to_string(n));
  switch (strategy) {
    case TargetStrategy::MinQ:
      return *std::min_element(q.begin(), q.end());
    case TargetStrategy::MeanQ: {
      double s = 0.0;
      for (double v : q) s += v;
      return s / static_cast<double>(n);
    }
    case TargetStrategy::REM: {
      const auto w = rem_weights(n, rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += w[i] * q[i];
      // Clamp guards the convex-hull property against rounding.
      const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
      return std::clamp(acc, *lo, *hi);
    }
    case TargetStrategy::RandomMinPair: {
      std::uniform_int_distribution<std::size_t> first(0, n - 1);
      std::uniform_int_distribution<std::size_t> second(0, n - 2);
      const std::size_t i = first(rng);
      std::size_t j = second(rng);
      if (j >= i) ++j;
      return std::min(q[i], q[j]);
    }
    case TargetStrategy::WeightedMinPair:
      return weighted_min_pair(q);
  }
  throw ConfigError("invalid target strategy");
}

double td_target(double reward, bool done, double gamma, double reduced_next_q, double alpha, double next_log_prob) {
  if (done) return reward;
  return reward + gamma * (reduced_next_q - alpha * next_log_prob);
}

double sunrise_weight(double next_q_std, double temperature) {
  if (!(next_q_std >= 0.0)) throw ConfigError("sunrise_weight: std must be non-negative");
  if (!(temperature >= 0.0)) throw ConfigError("sunrise_weight: temperature must be non-negative");
  const double x = next_q_std * temperature;
  // Large x rounds to exactly 0.5; the floor keeps the open lower bound.
  return std::max(1.0 / (1.0 + std::exp(x)) + 0.5, std::nextafter(0.5, 1.0));
}

}  // namespace e2o::agent
