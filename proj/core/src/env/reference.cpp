#include "e2o/env/reference.hpp"

#include <cmath>
#include <limits>

#include "e2o/agent/agent.hpp"
#include "e2o/agent/policy.hpp"
#include "e2o/errors.hpp"
#include "e2o/replay/buffer.hpp"

namespace e2o::env {

namespace {

enum Stream : std::uint64_t {
  kInit = 1,
  kTrain = 2,
  kEpisodes = 3,
  kCheckpointEval = 4,
  kVerifyEval = 5,
  kRandomRef = 6,
  kExpertRef = 7,
  kMediumData = 8,
  kExpertData = 9,
};

}  // namespace

ReferenceTrainingConfig ReferenceTrainingConfig::defaults(const EnvSpec& spec) {
  ReferenceTrainingConfig c;
  c.agent.obs_dim = spec.obs_dim;
  c.agent.act_dim = spec.act_dim;
  c.agent.hidden_sizes = {64, 64};
  c.agent.ensemble_size = 2;
  c.agent.policy_lr = 1e-3;
  c.agent.critic_lr = 1e-3;
  c.agent.alpha_lr = 1e-3;
  c.agent.batch_size = 128;
  c.agent.initial_alpha = 0.2;
  c.agent.cql_alpha = 0.0;
  c.agent.target_strategy = agent::TargetStrategy::MinQ;
  c.agent.exploration = agent::Exploration::None;
  switch (spec.env_id) {
    case EnvId::pendulum:
      c.total_steps = 20000;
      break;
    case EnvId::pointmass:
      c.total_steps = 10000;
      break;
  }
  return c;
}

BatchPolicy stochastic_policy(const nn::Mlp& trunk) {
  agent::SquashedGaussianPolicy policy(trunk);
  return [policy](const nn::Matrix<float>& obs, Rng& rng) { return policy.sample(obs, rng, false).actions; };
}

BatchPolicy deterministic_policy(const nn::Mlp& trunk) {
  agent::SquashedGaussianPolicy policy(trunk);
  return [policy](const nn::Matrix<float>& obs, Rng&) { return policy.deterministic_actions(obs); };
}

ReferencePolicies train_reference_policies(const EnvSpec& spec, std::uint64_t seed,
                                           const ReferenceTrainingConfig& config) {
  agent::AgentConfig acfg = config.agent;
  acfg.obs_dim = spec.obs_dim;
  acfg.act_dim = spec.act_dim;
  acfg.cql_alpha = 0.0;
  agent::Agent sac(acfg, derive_seed(seed, kInit));
  sac.set_phase(agent::Phase::online);

  replay::ReplayBuffer buffer(std::max<std::uint64_t>(config.total_steps, 1), spec.obs_dim, spec.act_dim,
                              acfg.ensemble_size, 1.0);
  Rng rng(derive_seed(seed, kTrain));
  std::uniform_real_distribution<float> unif(-1.0f, 1.0f);
  const std::uint64_t eval_seed = derive_seed(seed, kCheckpointEval);

  std::vector<PolicyCheckpoint> checkpoints;
  std::vector<TransitionRecord> trace;
  trace.reserve(config.total_steps);
  std::uint64_t episode = 0;
  EnvState state = env_reset(spec, derive_seed(derive_seed(seed, kEpisodes), episode));
  for (std::uint64_t t = 0; t < config.total_steps; ++t) {
    TransitionRecord rec;
    rec.obs = observe(spec, state);
    if (t < config.random_warmup_steps) {
      rec.action.resize(spec.act_dim);
      for (float& a : rec.action) a = unif(rng);
    } else {
      rec.action = sac.act(rec.obs, rng, false);
    }
    const auto r = env_step(spec, state, rec.action);
    rec.reward = static_cast<float>(r.reward);
    rec.next_obs = observe(spec, r.next);
    rec.done = r.done;
    rec.truncated = r.truncated;
    buffer.push(rec, rng);
    trace.push_back(std::move(rec));
    state = (r.done || r.truncated) ? env_reset(spec, derive_seed(derive_seed(seed, kEpisodes), ++episode)) : r.next;

    if (t + 1 >= config.random_warmup_steps && buffer.size() >= static_cast<std::size_t>(acfg.batch_size)) {
      sac.update(buffer.sample_uniform(acfg.batch_size, rng), rng);
    }
    if ((t + 1) % config.checkpoint_interval == 0) {
      const auto ev = run_episodes(spec, deterministic_policy(sac.policy().trunk()), config.checkpoint_eval_episodes,
                                   eval_seed);
      checkpoints.push_back({t + 1, ev.mean_return, sac.policy().trunk()});
    }
  }
  if (checkpoints.empty()) throw GenerationError("reference training produced no checkpoints");

  const double random_ckpt_scale =
      run_episodes(spec, uniform_random_policy(spec.act_dim), config.checkpoint_eval_episodes, eval_seed).mean_return;
  std::size_t best = 0;
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (checkpoints[i].eval_return > checkpoints[best].eval_return) best = i;
  }
  const double span = checkpoints[best].eval_return - random_ckpt_scale;
  if (!(span > config.min_improvement * std::abs(random_ckpt_scale))) {
    throw GenerationError("reference SAC failed to beat the random policy by the required margin (best " +
                          std::to_string(checkpoints[best].eval_return) + " vs random " +
                          std::to_string(random_ckpt_scale) + ")");
  }
  const double midpoint = random_ckpt_scale + 0.5 * span;
  std::size_t medium = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const double gap = std::abs(checkpoints[i].eval_return - midpoint);
    if (gap < best_gap) {
      best_gap = gap;
      medium = i;
    }
  }

  ReferencePolicies out;
  out.env_id = spec.env_id;
  out.expert = checkpoints[best].trunk;
  out.expert_step = checkpoints[best].step;
  out.medium = checkpoints[medium].trunk;
  out.medium_step = checkpoints[medium].step;
  trace.resize(out.medium_step);
  out.replay_trace = std::move(trace);
  for (const auto& c : checkpoints) out.learning_curve.emplace_back(c.step, c.eval_return);

  const std::uint64_t verify_seed = derive_seed(seed, kVerifyEval);
  out.random_return =
      run_episodes(spec, uniform_random_policy(spec.act_dim), config.verify_eval_episodes, verify_seed).mean_return;
  out.medium_return =
      run_episodes(spec, deterministic_policy(out.medium), config.verify_eval_episodes, verify_seed).mean_return;
  out.expert_return =
      run_episodes(spec, deterministic_policy(out.expert), config.verify_eval_episodes, verify_seed).mean_return;
  return out;
}

Dataset generate_dataset(DatasetKind kind, const EnvSpec& spec, std::uint64_t seed, std::size_t size,
                         const ReferencePolicies& refs) {
  if (refs.env_id != spec.env_id) throw GenerationError("reference policies belong to a different environment");
  if (refs.medium.param_count() == 0 || refs.expert.param_count() == 0) {
    throw GenerationError("reference policy snapshots are missing");
  }
  if (size == 0 && kind != DatasetKind::medium_replay) throw GenerationError("dataset size must be positive");

  Dataset d;
  switch (kind) {
    case DatasetKind::medium:
      d.records = collect_transitions(spec, stochastic_policy(refs.medium), size, derive_seed(seed, kMediumData));
      break;
    case DatasetKind::medium_replay:
      d.records = refs.replay_trace;
      if (d.records.empty()) throw GenerationError("replay trace is empty");
      break;
    case DatasetKind::medium_expert: {
      d.records = collect_transitions(spec, stochastic_policy(refs.medium), size / 2, derive_seed(seed, kMediumData));
      auto expert =
          collect_transitions(spec, stochastic_policy(refs.expert), size - size / 2, derive_seed(seed, kExpertData));
      d.records.insert(d.records.end(), expert.begin(), expert.end());
      break;
    }
  }
  d.header.env_id = spec.env_id;
  d.header.kind = kind;
  d.header.record_count = d.records.size();
  d.header.generator_seed = seed;
  d.header.random_ref_score = run_episodes(spec, uniform_random_policy(spec.act_dim), kReferenceScoreEpisodes,
                                           derive_seed(seed, kRandomRef))
                                  .mean_return;
  d.header.expert_ref_score =
      run_episodes(spec, deterministic_policy(refs.expert), kReferenceScoreEpisodes, derive_seed(seed, kExpertRef))
          .mean_return;
  if (!(d.header.expert_ref_score > d.header.random_ref_score)) {
    throw GenerationError("expert reference score does not exceed the random reference score");
  }
  return d;
}

}  // namespace e2o::env
