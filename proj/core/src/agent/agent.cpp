#include "e2o/agent/agent.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "e2o/agent/kernels.hpp"
#include "e2o/agent/targets.hpp"
#include "e2o/errors.hpp"
#include "e2o/io/binary.hpp"

namespace e2o::agent {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

std::string describe(const QStats& s) {
  return "q_stats{mean=" + std::to_string(s.mean) + ", std=" + std::to_string(s.std) +
         ", min=" + std::to_string(s.min) + ", max=" + std::to_string(s.max) + "}";
}

QStats summarize(const nn::Matrix<float>& q) {
  QStats s;
  const auto n = static_cast<double>(q.size());
  double sum = 0.0;
  double sq = 0.0;
  s.min = q.minCoeff();
  s.max = q.maxCoeff();
  for (Eigen::Index i = 0; i < q.size(); ++i) sum += q.data()[i];
  s.mean = sum / n;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double d = q.data()[i] - s.mean;
    sq += d * d;
  }
  s.std = std::sqrt(sq / n);
  return s;
}

void write_adam(io::BinaryWriter& w, const nn::AdamState& s) {
  w.u64(s.step_count);
  w.f32(s.learning_rate);
  w.f32(s.beta1);
  w.f32(s.beta2);
  w.f32(s.epsilon);
  w.u64(s.first_moment.size());
  w.f32_array(s.first_moment);
  w.f32_array(s.second_moment);
}

nn::AdamState read_adam(io::BinaryReader& r) {
  nn::AdamState s;
  s.step_count = r.u64();
  s.learning_rate = r.f32();
  s.beta1 = r.f32();
  s.beta2 = r.f32();
  s.epsilon = r.f32();
  const std::uint64_t n = r.u64();
  if (n * 8 > r.remaining()) throw FormatError("truncated optimizer state");
  s.first_moment.resize(n);
  s.second_moment.resize(n);
  r.f32_array(s.first_moment);
  r.f32_array(s.second_moment);
  return s;
}

void apply_gradient(std::span<float> params, std::vector<float>& grad, nn::AdamState& optim, double max_norm) {
  if (max_norm > 0.0) nn::clip_grad_norm(grad, max_norm);
  nn::adam_step(params, grad, optim);
}

}  // namespace

Agent::Agent(AgentConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(init_seed);
  policy_ = SquashedGaussianPolicy(config_.obs_dim, config_.act_dim, config_.hidden_sizes, rng);
  policy_optim_ = nn::AdamState::fresh(policy_.trunk().param_count(), static_cast<float>(config_.policy_lr));
  ensemble_ = QEnsemble::create(config_, rng);
  reset_temperature();
}

Agent Agent::from_checkpoint(const CheckpointContents& c, AgentConfig config) {
  config.validate();
  if (c.ensemble_size != config.ensemble_size) {
    throw ConfigError("checkpoint holds an ensemble of " + std::to_string(c.ensemble_size) +
                      " critics but the config asks for " + std::to_string(config.ensemble_size));
  }
  if (c.architecture_hash != config.architecture_hash()) {
    throw ConfigError("checkpoint architecture hash does not match the config (dims or hidden sizes differ)");
  }
  Agent a;
  a.config_ = std::move(config);
  a.phase_ = c.phase;
  a.policy_ = SquashedGaussianPolicy(c.policy);
  a.policy_optim_ = c.policy_optim;
  a.ensemble_ = c.ensemble;
  a.log_alpha_ = c.log_alpha;
  a.alpha_optim_ = c.alpha_optim;
  return a;
}

void Agent::reconfigure(AgentConfig config) {
  config.validate();
  if (config.architecture_hash() != config_.architecture_hash()) {
    throw ConfigError("reconfigure may not change the network architecture");
  }
  config_ = std::move(config);
  policy_optim_.learning_rate = static_cast<float>(config_.policy_lr);
  alpha_optim_.learning_rate = static_cast<float>(config_.alpha_lr);
  for (auto& o : ensemble_.optim) o.learning_rate = static_cast<float>(config_.critic_lr);
}

double Agent::alpha() const { return std::exp(static_cast<double>(log_alpha_)); }

void Agent::reset_temperature() {
  log_alpha_ = static_cast<float>(std::log(config_.initial_alpha));
  alpha_optim_ = nn::AdamState::fresh(1, static_cast<float>(config_.alpha_lr));
}

CriticUpdateResult Agent::critic_update(const replay::Batch& batch, Rng& rng) {
  const Eigen::Index B = batch.size();
  if (B == 0) throw StateError("critic_update needs a non-empty batch");
  const int N = ensemble_.size();
  if (batch.masks.rows() != N) throw ShapeError("batch mask rows do not match the ensemble size");
  const int act = config_.act_dim;
  const int in_dim = config_.obs_dim + act;
  const double alpha = this->alpha();

  const auto next = policy_.sample(batch.next_obs, rng, false);
  const nn::Matrix<float> next_q = ensemble_.q_values(batch.next_obs, next.actions, true);

  kernels::CriticProblem<float> prob;
  prob.targets.resize(B);
  nn::Vector<float> backup_weight(B);
  std::vector<double> column(static_cast<std::size_t>(N));
  for (Eigen::Index b = 0; b < B; ++b) {
    double mean = 0.0;
    for (int k = 0; k < N; ++k) {
      column[k] = next_q(k, b);
      mean += column[k];
    }
    mean /= N;
    double var = 0.0;
    for (int k = 0; k < N; ++k) var += (column[k] - mean) * (column[k] - mean);
    const double reduced = reduce_target(column, config_.target_strategy, rng);
    prob.targets(b) = static_cast<float>(td_target(batch.rewards(b), batch.not_done(b) == 0.0f, config_.gamma,
                                                   reduced, alpha, next.log_probs(b)));
    backup_weight(b) = static_cast<float>(sunrise_weight(std::sqrt(var / N), config_.sunrise_temperature));
  }

  const bool use_cql = config_.cql_alpha > 0.0;
  const int M = config_.cql_num_sampled_actions;
  const int P = use_cql ? 2 * M : 0;
  prob.proposals = P;
  prob.cql_alpha = static_cast<float>(config_.cql_alpha);
  prob.inputs.resize(in_dim, B + B * P);
  prob.inputs.leftCols(B) = QEnsemble::join(batch.obs, batch.actions);
  if (use_cql) {
    prob.proposal_log_density.resize(B * P);
    const float log_uniform = -static_cast<float>(act) * static_cast<float>(std::numbers::ln2);
    std::uniform_real_distribution<float> unif(-1.0f, 1.0f);
    nn::Matrix<float> repeated(config_.obs_dim, B * M);
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int j = 0; j < M; ++j) repeated.col(b * M + j) = batch.obs.col(b);
    }
    const auto pol = policy_.sample(repeated, rng, false);
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int j = 0; j < M; ++j) {
        const Eigen::Index c = B + b * P + j;
        prob.inputs.col(c).head(config_.obs_dim) = batch.obs.col(b);
        for (int i = 0; i < act; ++i) prob.inputs(config_.obs_dim + i, c) = unif(rng);
        prob.proposal_log_density(b * P + j) = log_uniform;
      }
      for (int j = 0; j < M; ++j) {
        const Eigen::Index c = B + b * P + M + j;
        prob.inputs.col(c).head(config_.obs_dim) = batch.obs.col(b);
        prob.inputs.col(c).tail(act) = pol.actions.col(b * M + j);
        prob.proposal_log_density(b * P + M + j) = pol.log_probs(b * M + j);
      }
    }
  }

  CriticUpdateResult result;
  nn::Matrix<float> predictions(N, B);
  std::vector<float> grad;
  for (int k = 0; k < N; ++k) {
    nn::Vector<float> mask = batch.masks.row(k).cast<float>().transpose();
    prob.td_weights = backup_weight.cwiseProduct(mask);
    if (use_cql) prob.cql_weights = mask;
    auto& net = ensemble_.online[k];
    grad.assign(net.param_count(), 0.0f);
    nn::Vector<float> data_q;
    const auto terms = kernels::critic_loss<float>(net, prob, grad, &data_q);
    predictions.row(k) = data_q.transpose();
    if (!std::isfinite(terms.total)) {
      throw DiagnosticError("non-finite critic loss for critic " + std::to_string(k) + "; " +
                            describe(summarize(predictions.topRows(k + 1))));
    }
    apply_gradient(net.params(), grad, ensemble_.optim[k], config_.max_grad_norm);
    result.loss_per_critic.push_back(terms.total);
    result.cql_penalty_per_critic.push_back(terms.cql_penalty);
  }
  result.q_stats = summarize(predictions);
  ensemble_.polyak(config_.tau);
  return result;
}

double Agent::actor_update(const nn::Matrix<float>& obs, Rng& rng, double& mean_log_prob) {
  const nn::Matrix<float> noise = standard_normal_matrix(config_.act_dim, obs.cols(), rng);
  std::vector<float> grad(policy_.trunk().param_count(), 0.0f);
  const auto reduction = phase_ == Phase::offline ? kernels::ActorReduction::min : kernels::ActorReduction::mean;
  const auto terms = kernels::actor_loss<float>(policy_.trunk(), ensemble_.online, obs, noise,
                                                static_cast<float>(alpha()), reduction, grad);
  if (!std::isfinite(terms.loss) || !std::isfinite(terms.mean_log_prob)) {
    throw DiagnosticError("non-finite actor loss");
  }
  apply_gradient(policy_.trunk().params(), grad, policy_optim_, config_.max_grad_norm);
  mean_log_prob = terms.mean_log_prob;
  return terms.loss;
}

double Agent::temperature_update(double mean_log_prob) {
  const float grad = static_cast<float>(-(mean_log_prob + config_.resolved_target_entropy()));
  nn::adam_step(std::span<float>(&log_alpha_, 1), std::span<const float>(&grad, 1), alpha_optim_);
  return alpha();
}

UpdateStats Agent::update(const replay::Batch& batch, Rng& rng) {
  UpdateStats s;
  const auto critic = critic_update(batch, rng);
  for (std::size_t k = 0; k < critic.loss_per_critic.size(); ++k) {
    s.critic_loss += critic.loss_per_critic[k];
    s.cql_penalty += critic.cql_penalty_per_critic[k];
  }
  s.critic_loss /= static_cast<double>(critic.loss_per_critic.size());
  s.cql_penalty /= static_cast<double>(critic.loss_per_critic.size());
  s.q_stats = critic.q_stats;
  double mean_log_prob = 0.0;
  s.actor_loss = actor_update(batch.obs, rng, mean_log_prob);
  s.alpha = temperature_update(mean_log_prob);
  return s;
}

nn::Matrix<float> Agent::single_column(std::span<const float> obs) const {
  if (static_cast<int>(obs.size()) != config_.obs_dim) {
    throw ShapeError("observation width " + std::to_string(obs.size()) + " does not match obs_dim " +
                     std::to_string(config_.obs_dim));
  }
  nn::Matrix<float> o(config_.obs_dim, 1);
  for (int i = 0; i < config_.obs_dim; ++i) o(i, 0) = obs[i];
  return o;
}

std::vector<float> Agent::act(std::span<const float> obs, Rng& rng, bool deterministic) const {
  return sample_action(policy_, obs, rng, deterministic).first;
}

void Agent::begin_episode(Rng& rng) {
  if (config_.exploration == Exploration::BootstrappedHeads) {
    current_head_ = std::uniform_int_distribution<int>(0, ensemble_.size() - 1)(rng);
  }
}

std::vector<float> Agent::select_exploration_action(std::span<const float> obs, Rng& rng) const {
  const nn::Matrix<float> o = single_column(obs);
  switch (config_.exploration) {
    case Exploration::None: {
      const auto s = policy_.sample(o, rng, false);
      return {s.actions.data(), s.actions.data() + s.actions.size()};
    }
    case Exploration::SUNRISE_UCB:
    case Exploration::BootstrappedHeads:
      return explore_candidates(o, rng);
    case Exploration::OAC:
      return explore_oac(o, rng);
  }
  throw ConfigError("invalid exploration mode");
}

std::vector<float> Agent::explore_candidates(const nn::Matrix<float>& obs, Rng& rng) const {
  const int K = config_.ucb_num_candidates;
  if (K < 1) throw ConfigError("ucb_num_candidates must be at least 1");
  const nn::Matrix<float> repeated = obs.replicate(1, K);
  const auto cand = policy_.sample(repeated, rng, false);
  const nn::Matrix<float> q = ensemble_.q_values(repeated, cand.actions);
  const int N = ensemble_.size();
  Eigen::Index best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < K; ++j) {
    double score;
    if (config_.exploration == Exploration::BootstrappedHeads) {
      score = q(current_head_, j);
    } else {
      double mean = 0.0;
      for (int k = 0; k < N; ++k) mean += q(k, j);
      mean /= N;
      double var = 0.0;
      for (int k = 0; k < N; ++k) var += (q(k, j) - mean) * (q(k, j) - mean);
      score = mean + config_.ucb_lambda * std::sqrt(var / N);
    }
    if (score > best_score) {
      best_score = score;
      best = j;
    }
  }
  return {cand.actions.col(best).data(), cand.actions.col(best).data() + config_.act_dim};
}

std::vector<float> Agent::explore_oac(const nn::Matrix<float>& obs, Rng& rng) const {
  const int act = config_.act_dim;
  const int N = ensemble_.size();
  const nn::Matrix<float> out = policy_.trunk().forward(obs);
  if (!out.allFinite()) throw DiagnosticError("policy produced non-finite trunk output");
  const nn::Matrix<float> mean = out.topRows(act);
  const nn::Matrix<float> log_std =
      out.bottomRows(act).cwiseMax(float(kernels::kLogStdMin)).cwiseMin(float(kernels::kLogStdMax));
  const nn::Matrix<float> sigma = log_std.array().exp().matrix();
  const nn::Matrix<float> a0 = kernels::squash<float>(mean);
  const nn::Matrix<float> in = QEnsemble::join(obs, a0);

  std::vector<nn::Mlp::Tape> tapes(N);
  std::vector<double> q(N);
  double q_mean = 0.0;
  for (int k = 0; k < N; ++k) {
    q[k] = ensemble_.online[k].forward(in, tapes[k])(0, 0);
    q_mean += q[k];
  }
  q_mean /= N;
  double var = 0.0;
  for (int k = 0; k < N; ++k) var += (q[k] - q_mean) * (q[k] - q_mean);
  const double q_std = std::sqrt(var / N);

  // Gradient of mean(Q) + beta * std(Q) with respect to the squashed action.
  const double beta = config_.ucb_lambda;
  nn::Matrix<float> grad_a = nn::Matrix<float>::Zero(act, 1);
  for (int k = 0; k < N; ++k) {
    double coef = 1.0 / N;
    if (q_std > 0.0) coef += beta * (q[k] - q_mean) / (N * q_std);
    nn::Matrix<float> up(1, 1);
    up(0, 0) = static_cast<float>(coef);
    grad_a += ensemble_.online[k].backward(tapes[k], up, {}, true).bottomRows(act);
  }

  std::vector<double> shift(act, 0.0);
  double norm_sq = 0.0;
  std::vector<double> grad_u(act);
  for (int i = 0; i < act; ++i) {
    const double a = a0(i, 0);
    grad_u[i] = grad_a(i, 0) * (1.0 - a * a);
    const double var_i = static_cast<double>(sigma(i, 0)) * sigma(i, 0);
    norm_sq += var_i * grad_u[i] * grad_u[i];
  }
  if (norm_sq > 0.0) {
    const double scale = std::sqrt(2.0 * config_.oac_delta) / std::sqrt(norm_sq);
    for (int i = 0; i < act; ++i) shift[i] = scale * sigma(i, 0) * sigma(i, 0) * grad_u[i];
  }
  std::normal_distribution<float> noise(0.0f, 1.0f);
  nn::Matrix<float> u(act, 1);
  for (int i = 0; i < act; ++i) u(i, 0) = static_cast<float>(mean(i, 0) + shift[i]) + sigma(i, 0) * noise(rng);
  const nn::Matrix<float> a = kernels::squash<float>(u);
  return {a.data(), a.data() + act};
}

std::vector<std::uint8_t> Agent::save_checkpoint(env::EnvId env_id) const {
  io::BinaryWriter w;
  w.magic("E2OC");
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(phase_));
  w.u8(static_cast<std::uint8_t>(env_id));
  w.u64(config_.architecture_hash());
  w.u32(static_cast<std::uint32_t>(ensemble_.size()));
  w.u32(static_cast<std::uint32_t>(config_.obs_dim));
  w.u32(static_cast<std::uint32_t>(config_.act_dim));
  w.blob(nn::save_snapshot(policy_.trunk()));
  write_adam(w, policy_optim_);
  w.f32(log_alpha_);
  write_adam(w, alpha_optim_);
  for (int k = 0; k < ensemble_.size(); ++k) {
    w.blob(nn::save_snapshot(ensemble_.online[k]));
    w.blob(nn::save_snapshot(ensemble_.target[k]));
    write_adam(w, ensemble_.optim[k]);
  }
  return std::move(w).bytes();
}

CheckpointContents parse_checkpoint(std::span<const std::uint8_t> bytes) {
  io::BinaryReader r(bytes);
  r.expect_magic("E2OC");
  if (const auto v = r.u32(); v != kCheckpointVersion) {
    throw FormatError("unsupported E2OC version " + std::to_string(v));
  }
  CheckpointContents c;
  const std::uint8_t phase = r.u8();
  if (phase > 1) throw FormatError("unknown phase tag in checkpoint");
  c.phase = static_cast<Phase>(phase);
  const std::uint8_t env_code = r.u8();
  if (env_code > static_cast<std::uint8_t>(env::EnvId::pointmass)) throw FormatError("unknown env id in checkpoint");
  c.env_id = static_cast<env::EnvId>(env_code);
  c.architecture_hash = r.u64();
  c.ensemble_size = static_cast<int>(r.u32());
  c.obs_dim = static_cast<int>(r.u32());
  c.act_dim = static_cast<int>(r.u32());
  if (c.ensemble_size < 1 || c.ensemble_size > 4096) throw FormatError("implausible ensemble size in checkpoint");
  c.policy = nn::load_snapshot(r.blob());
  c.policy_optim = read_adam(r);
  c.log_alpha = r.f32();
  c.alpha_optim = read_adam(r);
  for (int k = 0; k < c.ensemble_size; ++k) {
    c.ensemble.online.push_back(nn::load_snapshot(r.blob()));
    c.ensemble.target.push_back(nn::load_snapshot(r.blob()));
    c.ensemble.optim.push_back(read_adam(r));
  }
  r.expect_end();
  if (c.policy.input_dim() != c.obs_dim || c.policy.output_dim() != 2 * c.act_dim) {
    throw FormatError("checkpoint policy shape does not match its declared dims");
  }
  if (c.policy_optim.first_moment.size() != c.policy.param_count()) {
    throw FormatError("checkpoint policy optimizer does not match the policy");
  }
  for (int k = 0; k < c.ensemble_size; ++k) {
    if (c.ensemble.online[k].input_dim() != c.obs_dim + c.act_dim || c.ensemble.online[k].output_dim() != 1 ||
        c.ensemble.target[k].layer_dims() != c.ensemble.online[k].layer_dims() ||
        c.ensemble.optim[k].first_moment.size() != c.ensemble.online[k].param_count()) {
      throw FormatError("checkpoint critic " + std::to_string(k) + " has inconsistent shapes");
    }
  }
  return c;
}

}  // namespace e2o::agent
