#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace e2o::env {

enum class EnvId : std::uint8_t { pendulum = 0, pointmass = 1 };

std::string to_string(EnvId id);
EnvId parse_env_id(std::string_view name);

/// Static description of an environment. Actions are always scaled to [-1, 1].
struct EnvSpec {
  EnvId env_id = EnvId::pendulum;
  int obs_dim = 0;
  int act_dim = 0;
  int max_episode_steps = 0;
  double dt = 0.0;
  /// Pendulum: half-width of the uniform perturbation around hanging-down.
  /// Pointmass: half-width of the square start region centred on the goal.
  double init_noise = 0.0;

  friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

EnvSpec make_spec(EnvId id);

namespace pendulum {
inline constexpr double kGravity = 10.0;
inline constexpr double kMass = 1.0;
inline constexpr double kLength = 1.0;
inline constexpr double kMaxTorque = 2.0;
inline constexpr double kMaxSpeed = 8.0;
}  // namespace pendulum

namespace pointmass {
inline constexpr double kDamping = 1.0;
inline constexpr double kAccel = 1.0;
inline constexpr double kWall = 2.0;
inline constexpr std::array<double, 2> kGoal{0.0, 0.0};
}  // namespace pointmass

/// Physical state. Pendulum uses x = (theta, theta_dot) with theta = 0 upright;
/// pointmass uses x = (px, py, vx, vy).
struct EnvState {
  EnvId env_id = EnvId::pendulum;
  std::array<double, 4> x{};
  int t = 0;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;
  bool clamped = false;
};

EnvState env_reset(const EnvSpec& spec, std::uint64_t seed);

/// Pure transition. Components outside [-1, 1] are clamped (reported via
/// `clamped`); non-finite actions are rejected.
StepResult env_step(const EnvSpec& spec, const EnvState& state, std::span<const float> action);

std::vector<float> observe(const EnvSpec& spec, const EnvState& state);

/// Wraps an angle to [-pi, pi).
double wrap_angle(double theta);

}  // namespace e2o::env
