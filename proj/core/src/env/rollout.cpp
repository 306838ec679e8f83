#include "e2o/env/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "e2o/errors.hpp"

namespace e2o::env {

BatchPolicy uniform_random_policy(int act_dim) {
  return [act_dim](const nn::Matrix<float>& obs, Rng& rng) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    nn::Matrix<float> a(act_dim, obs.cols());
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = u(rng);
    }
    return a;
  };
}

EvalResult run_episodes(const EnvSpec& spec, const BatchPolicy& policy, int episodes, std::uint64_t eval_seed) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  Rng rng(derive_seed(eval_seed, 0x5eed));
  std::vector<EnvState> states;
  std::vector<bool> active(episodes, true);
  std::vector<double> returns(episodes, 0.0);
  for (int e = 0; e < episodes; ++e) states.push_back(env_reset(spec, eval_seed + static_cast<std::uint64_t>(e)));

  EvalResult out;
  int remaining = episodes;
  std::vector<int> index;
  while (remaining > 0) {
    index.clear();
    for (int e = 0; e < episodes; ++e) {
      if (active[e]) index.push_back(e);
    }
    nn::Matrix<float> obs(spec.obs_dim, static_cast<Eigen::Index>(index.size()));
    for (std::size_t j = 0; j < index.size(); ++j) {
      const auto o = observe(spec, states[index[j]]);
      for (int i = 0; i < spec.obs_dim; ++i) obs(i, static_cast<Eigen::Index>(j)) = o[i];
    }
    const nn::Matrix<float> actions = policy(obs, rng);
    if (actions.rows() != spec.act_dim || actions.cols() != obs.cols()) {
      throw ShapeError("policy returned a batch of the wrong shape");
    }
    for (std::size_t j = 0; j < index.size(); ++j) {
      const int e = index[j];
      const auto col = actions.col(static_cast<Eigen::Index>(j));
      const auto r = env_step(spec, states[e], std::span<const float>(col.data(), spec.act_dim));
      returns[e] += r.reward;
      out.clamp_count += r.clamped ? 1 : 0;
      states[e] = r.next;
      if (r.done || r.truncated) {
        active[e] = false;
        --remaining;
      }
    }
  }
  double sum = 0.0;
  for (double v : returns) sum += v;
  out.mean_return = sum / episodes;
  double sq = 0.0;
  for (double v : returns) sq += (v - out.mean_return) * (v - out.mean_return);
  out.std_return = std::sqrt(sq / episodes);
  out.returns = std::move(returns);
  return out;
}

std::vector<TransitionRecord> collect_transitions(const EnvSpec& spec, const BatchPolicy& policy, std::size_t count,
                                                  std::uint64_t seed) {
  std::vector<TransitionRecord> out;
  out.reserve(count);
  Rng rng(derive_seed(seed, 0xacc));
  std::uint64_t episode = 0;
  EnvState state = env_reset(spec, derive_seed(seed, episode));
  nn::Matrix<float> obs(spec.obs_dim, 1);
  while (out.size() < count) {
    TransitionRecord rec;
    rec.obs = observe(spec, state);
    for (int i = 0; i < spec.obs_dim; ++i) obs(i, 0) = rec.obs[i];
    const nn::Matrix<float> a = policy(obs, rng);
    rec.action.assign(a.data(), a.data() + spec.act_dim);
    for (float& v : rec.action) v = std::clamp(v, -1.0f, 1.0f);
    const auto r = env_step(spec, state, rec.action);
    rec.reward = static_cast<float>(r.reward);
    rec.next_obs = observe(spec, r.next);
    rec.done = r.done;
    rec.truncated = r.truncated;
    out.push_back(std::move(rec));
    if (r.done || r.truncated) {
      state = env_reset(spec, derive_seed(seed, ++episode));
    } else {
      state = r.next;
    }
  }
  if (!out.empty() && !out.back().done) out.back().truncated = true;
  return out;
}

}  // namespace e2o::env
