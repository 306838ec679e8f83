#include "e2o/env/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "e2o/errors.hpp"
#include "e2o/random.hpp"

namespace e2o::env {

std::string to_string(EnvId id) {
  switch (id) {
    case EnvId::pendulum:
      return "pendulum";
    case EnvId::pointmass:
      return "pointmass";
  }
  throw ConfigError("unknown env id");
}

EnvId parse_env_id(std::string_view name) {
  if (name == "pendulum") return EnvId::pendulum;
  if (name == "pointmass") return EnvId::pointmass;
  throw ConfigError("unknown environment '" + std::string(name) + "' (expected pendulum or pointmass)");
}

EnvSpec make_spec(EnvId id) {
  switch (id) {
    case EnvId::pendulum:
      return {.env_id = id, .obs_dim = 3, .act_dim = 1, .max_episode_steps = 200, .dt = 0.05, .init_noise = 0.1};
    case EnvId::pointmass:
      return {.env_id = id, .obs_dim = 4, .act_dim = 2, .max_episode_steps = 100, .dt = 0.1, .init_noise = 1.0};
  }
  throw ConfigError("unknown env id");
}

double wrap_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double w = std::fmod(theta + pi, 2.0 * pi);
  if (w < 0.0) w += 2.0 * pi;
  return w - pi;
}

EnvState env_reset(const EnvSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  EnvState s{.env_id = spec.env_id};
  const double h = spec.init_noise;
  switch (spec.env_id) {
    case EnvId::pendulum:
      s.x[0] = std::numbers::pi + (h > 0.0 ? uniform(rng, -h, h) : 0.0);
      s.x[1] = h > 0.0 ? uniform(rng, -h, h) : 0.0;
      break;
    case EnvId::pointmass:
      s.x[0] = pointmass::kGoal[0] + (h > 0.0 ? uniform(rng, -h, h) : 0.0);
      s.x[1] = pointmass::kGoal[1] + (h > 0.0 ? uniform(rng, -h, h) : 0.0);
      break;
  }
  return s;
}

StepResult env_step(const EnvSpec& spec, const EnvState& state, std::span<const float> action) {
  if (static_cast<int>(action.size()) != spec.act_dim) {
    throw ShapeError("action width " + std::to_string(action.size()) + " does not match act_dim " +
                     std::to_string(spec.act_dim));
  }
  if (state.env_id != spec.env_id) throw ConfigError("state belongs to a different environment");
  StepResult r;
  std::array<double, 2> u{};
  for (int i = 0; i < spec.act_dim; ++i) {
    const double a = action[i];
    if (!std::isfinite(a)) throw DiagnosticError("non-finite action component " + std::to_string(i));
    if (a < -1.0 || a > 1.0) r.clamped = true;
    u[i] = std::clamp(a, -1.0, 1.0);
  }

  r.next = state;
  r.next.t = state.t + 1;
  const double dt = spec.dt;
  switch (spec.env_id) {
    case EnvId::pendulum: {
      using namespace pendulum;
      const double theta = state.x[0];
      const double omega = state.x[1];
      const double torque = kMaxTorque * u[0];
      const double err = wrap_angle(theta);
      r.reward = -(err * err + 0.1 * omega * omega + 0.001 * torque * torque);
      const double accel =
          3.0 * kGravity / (2.0 * kLength) * std::sin(theta) + 3.0 / (kMass * kLength * kLength) * torque;
      const double new_omega = std::clamp(omega + accel * dt, -kMaxSpeed, kMaxSpeed);
      r.next.x[0] = theta + new_omega * dt;
      r.next.x[1] = new_omega;
      break;
    }
    case EnvId::pointmass: {
      using namespace pointmass;
      for (int i = 0; i < 2; ++i) {
        double v = (1.0 - kDamping * dt) * state.x[2 + i] + kAccel * u[i] * dt;
        double p = state.x[i] + v * dt;
        if (p > kWall || p < -kWall) {
          p = std::clamp(p, -kWall, kWall);
          v = 0.0;
        }
        r.next.x[i] = p;
        r.next.x[2 + i] = v;
      }
      const double dx = r.next.x[0] - kGoal[0];
      const double dy = r.next.x[1] - kGoal[1];
      r.reward = -std::sqrt(dx * dx + dy * dy);
      break;
    }
  }
  r.done = false;
  r.truncated = r.next.t >= spec.max_episode_steps;
  return r;
}

std::vector<float> observe(const EnvSpec& spec, const EnvState& state) {
  switch (spec.env_id) {
    case EnvId::pendulum:
      return {static_cast<float>(std::cos(state.x[0])), static_cast<float>(std::sin(state.x[0])),
              static_cast<float>(state.x[1])};
    case EnvId::pointmass:
      return {static_cast<float>(state.x[0]), static_cast<float>(state.x[1]), static_cast<float>(state.x[2]),
              static_cast<float>(state.x[3])};
  }
  throw ConfigError("unknown env id");
}

}  // namespace e2o::env
