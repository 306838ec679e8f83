#include "e2o/pipeline/training.hpp"

#include <cmath>

#include "e2o/replay/buffer.hpp"

namespace e2o::pipeline {

namespace {

enum Stream : std::uint64_t {
  kInit = 11,
  kOffline = 12,
  kOnline = 13,
  kEval = 14,
  kProbe = 15,
  kEpisodes = 16,
};

void check_dataset(const RunConfig& config, const env::Dataset& dataset) {
  if (dataset.header.env_id != config.env.env_id) {
    throw ConfigError("dataset was recorded on " + env::to_string(dataset.header.env_id) + " but the run uses " +
                      env::to_string(config.env.env_id));
  }
  if (dataset.records.empty()) throw ConfigError("dataset is empty");
}

/// Running means of update statistics between two evaluation points.
struct StatAccumulator {
  double critic = 0.0;
  double actor = 0.0;
  std::uint64_t count = 0;
  std::uint64_t clamps = 0;

  void add(const agent::UpdateStats& s) {
    if (!std::isfinite(s.critic_loss) || !std::isfinite(s.actor_loss)) {
      throw DiagnosticError("non-finite loss (critic " + std::to_string(s.critic_loss) + ", actor " +
                            std::to_string(s.actor_loss) + ")");
    }
    critic += s.critic_loss;
    actor += s.actor_loss;
    ++count;
  }
  void reset() { *this = StatAccumulator{}; }
};

RunLogRow make_row(agent::Phase phase, std::uint64_t step, const env::EvalResult& ev, const env::DatasetHeader& header,
                   const QProbe& probe, const agent::Agent& a, const StatAccumulator& acc) {
  RunLogRow row;
  row.phase = phase;
  row.step = step;
  row.eval_return_mean = ev.mean_return;
  row.eval_return_std = ev.std_return;
  row.normalized_score = env::normalized_score(ev.mean_return, header);
  const auto reading = probe.measure(a.ensemble());
  row.avg_q_on_dataset = reading.mean_q;
  row.q_std_mean = reading.mean_std;
  row.critic_loss = acc.count ? acc.critic / static_cast<double>(acc.count) : 0.0;
  row.actor_loss = acc.count ? acc.actor / static_cast<double>(acc.count) : 0.0;
  row.alpha = a.alpha();
  row.action_clamp_count = acc.clamps + ev.clamp_count;
  return row;
}

}  // namespace

env::EvalResult evaluate(const agent::SquashedGaussianPolicy& policy, const env::EnvSpec& spec, int episodes,
                         std::uint64_t eval_seed) {
  if (episodes < 1) throw ConfigError("evaluate needs at least one episode");
  env::BatchPolicy fn = [&policy](const nn::Matrix<float>& obs, Rng&) { return policy.deterministic_actions(obs); };
  return env::run_episodes(spec, fn, episodes, eval_seed);
}

QProbe QProbe::from_dataset(const env::Dataset& dataset, std::size_t size, std::uint64_t seed) {
  if (dataset.records.empty()) throw StateError("cannot probe an empty dataset");
  const std::size_t n = std::min(size, dataset.records.size());
  const int obs_dim = static_cast<int>(dataset.records.front().obs.size());
  const int act_dim = static_cast<int>(dataset.records.front().action.size());
  QProbe p;
  p.obs.resize(obs_dim, static_cast<Eigen::Index>(n));
  p.actions.resize(act_dim, static_cast<Eigen::Index>(n));
  Rng rng(seed);
  std::vector<std::size_t> idx(dataset.records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Partial Fisher-Yates: the first n entries are a uniform sample without replacement.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
    const auto& rec = dataset.records[idx[i]];
    for (int d = 0; d < obs_dim; ++d) p.obs(d, static_cast<Eigen::Index>(i)) = rec.obs[d];
    for (int d = 0; d < act_dim; ++d) p.actions(d, static_cast<Eigen::Index>(i)) = rec.action[d];
  }
  return p;
}

QProbe::Reading QProbe::measure(const agent::QEnsemble& ensemble) const {
  const nn::Matrix<float> q = ensemble.q_values(obs, actions);
  const Eigen::MatrixXd qd = q.cast<double>();
  const Eigen::RowVectorXd mean = qd.colwise().mean();
  const Eigen::RowVectorXd var = (qd.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(qd.rows());
  return {mean.mean(), var.array().sqrt().mean()};
}

RunSeeds RunSeeds::from(std::uint64_t seed) {
  return {derive_seed(seed, kInit),  derive_seed(seed, kOffline), derive_seed(seed, kOnline),
          derive_seed(seed, kEval),  derive_seed(seed, kProbe),   derive_seed(seed, kEpisodes)};
}

std::vector<std::uint64_t> eval_schedule(std::uint64_t total, std::uint64_t interval) {
  if (interval == 0) throw ConfigError("eval interval must be positive");
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = interval; s < total; s += interval) out.push_back(s);
  if (total > 0) out.push_back(total);
  return out;
}

OfflineResult train_offline(const RunConfig& config, const env::Dataset& dataset, RunLog& log) {
  config.validate();
  check_dataset(config, dataset);
  const RunSeeds seeds = RunSeeds::from(config.seed);
  const agent::AgentConfig acfg = config.offline_agent_config();
  agent::Agent a(acfg, seeds.init);
  a.set_phase(agent::Phase::offline);

  Rng rng(seeds.offline);
  replay::ReplayBuffer buffer(dataset.records.size(), config.env.obs_dim, config.env.act_dim, acfg.ensemble_size,
                              config.resolved_mask_prob(agent::Phase::offline));
  buffer.init_from_dataset(dataset, config.env.env_id, rng);
  const QProbe probe = QProbe::from_dataset(dataset, kQProbeSize, seeds.probe);

  OfflineResult result;
  std::vector<std::uint8_t> last_good = a.save_checkpoint(config.env.env_id);
  StatAccumulator acc;
  std::uint64_t step = 0;
  for (const std::uint64_t next_eval : eval_schedule(config.offline_steps, config.eval_interval)) {
    try {
      for (; step < next_eval; ++step) acc.add(a.update(buffer.sample_uniform(acfg.batch_size, rng), rng));
    } catch (const DiagnosticError& e) {
      throw TrainingError("offline step " + std::to_string(step) + ": " + e.what(), std::move(last_good));
    }
    result.final_eval = evaluate(a.policy(), config.env, config.eval_episodes, seeds.eval);
    log.append(make_row(agent::Phase::offline, step, result.final_eval, dataset.header, probe, a, acc));
    acc.reset();
    last_good = a.save_checkpoint(config.env.env_id);
  }
  if (config.offline_steps == 0) result.final_eval = evaluate(a.policy(), config.env, config.eval_episodes, seeds.eval);
  result.checkpoint = std::move(last_good);
  return result;
}

OnlineResult train_online(const RunConfig& config, const env::Dataset& dataset,
                          std::span<const std::uint8_t> offline_checkpoint, RunLog& log) {
  config.validate();
  check_dataset(config, dataset);
  const agent::CheckpointContents contents = agent::parse_checkpoint(offline_checkpoint);
  if (contents.phase != agent::Phase::offline) {
    throw ConfigError("online fine-tuning requires a checkpoint tagged offline, got " + agent::to_string(contents.phase));
  }
  if (contents.env_id != config.env.env_id) {
    throw ConfigError("checkpoint was trained on " + env::to_string(contents.env_id));
  }
  const RunSeeds seeds = RunSeeds::from(config.seed);
  const agent::AgentConfig acfg = config.online_agent_config();
  agent::Agent a = agent::Agent::from_checkpoint(contents, acfg);
  a.reconfigure(acfg);
  a.set_phase(agent::Phase::online);
  a.reset_temperature();

  Rng rng(seeds.online);
  const std::size_t capacity =
      config.online_env_steps + (config.use_offline_data_online ? dataset.records.size() : 0);
  replay::ReplayBuffer buffer(std::max<std::size_t>(capacity, 1), config.env.obs_dim, config.env.act_dim,
                              acfg.ensemble_size, config.resolved_mask_prob(agent::Phase::online));
  if (config.use_offline_data_online) buffer.init_from_dataset(dataset, config.env.env_id, rng);
  const QProbe probe = QProbe::from_dataset(dataset, kQProbeSize, seeds.probe);

  OnlineResult result;
  result.handoff_eval = evaluate(a.policy(), config.env, config.eval_episodes, seeds.eval);
  result.final_eval = result.handoff_eval;

  std::vector<std::uint8_t> last_good = a.save_checkpoint(config.env.env_id);
  StatAccumulator acc;
  std::uint64_t episode = 0;
  env::EnvState state = env::env_reset(config.env, derive_seed(seeds.episodes, episode));
  a.begin_episode(rng);
  std::uint64_t step = 0;
  for (const std::uint64_t next_eval : eval_schedule(config.online_env_steps, config.resolved_online_eval_interval())) {
    try {
      for (; step < next_eval; ++step) {
        env::TransitionRecord rec;
        rec.obs = env::observe(config.env, state);
        rec.action = a.select_exploration_action(rec.obs, rng);
        const auto r = env::env_step(config.env, state, rec.action);
        if (r.clamped) ++acc.clamps;
        rec.reward = static_cast<float>(r.reward);
        rec.next_obs = env::observe(config.env, r.next);
        rec.done = r.done;
        rec.truncated = r.truncated;
        buffer.push(rec, rng);
        if (r.done || r.truncated) {
          state = env::env_reset(config.env, derive_seed(seeds.episodes, ++episode));
          a.begin_episode(rng);
        } else {
          state = r.next;
        }
        if (step + 1 >= config.online.update_after && buffer.size() >= static_cast<std::size_t>(acfg.batch_size)) {
          for (int u = 0; u < acfg.updates_per_env_step; ++u) {
            acc.add(a.update(buffer.sample_uniform(acfg.batch_size, rng), rng));
          }
        }
      }
    } catch (const DiagnosticError& e) {
      throw TrainingError("online step " + std::to_string(step) + ": " + e.what(), std::move(last_good));
    }
    result.final_eval = evaluate(a.policy(), config.env, config.eval_episodes, seeds.eval);
    log.append(make_row(agent::Phase::online, step, result.final_eval, dataset.header, probe, a, acc));
    acc.reset();
    last_good = a.save_checkpoint(config.env.env_id);
  }
  result.checkpoint = std::move(last_good);
  result.buffer_size = buffer.size();
  result.buffer_holds_dataset_sentinel = buffer.contains(dataset.records.front());
  return result;
}

}  // namespace e2o::pipeline
