// Acceptance suite: one PASS/FAIL line per criterion on stdout, progress on stderr.

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "e2o/agent/action_distance.hpp"
#include "e2o/agent/agent.hpp"
#include "e2o/agent/kernels.hpp"
#include "e2o/agent/targets.hpp"
#include "e2o/diag/curves.hpp"
#include "e2o/env/dataset.hpp"
#include "e2o/env/rollout.hpp"
#include "e2o/errors.hpp"
#include "e2o/io/binary.hpp"
#include "e2o/nn/grad_check.hpp"
#include "e2o/pipeline/experiment.hpp"
#include "e2o/pipeline/run_config.hpp"
#include "e2o/pipeline/training.hpp"
#include "e2o/replay/buffer.hpp"

using namespace e2o;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr int kC1Vectors = 1000;
constexpr int kC1Draws = 100000;
constexpr double kC1MeanTol = 0.02;
constexpr double kC1Budget = 5.0;
constexpr int kC2Configs = 10;
constexpr double kC2MaxRelErr = 1e-4;
constexpr double kC2Budget = 60.0;
constexpr int kC3Updates = 2000;
constexpr std::size_t kC3ProbeSize = 2000;
constexpr double kC3Budget = 300.0;
constexpr double kC4DropFraction = 0.10;
constexpr int kC4MinSeeds = 4;
constexpr double kC4Budget = 1800.0;
constexpr double kC5MinGain = 10.0;
constexpr double kC6UniformTol = 0.10;
constexpr std::size_t kC6Samples = 10000;
constexpr int kC7Pairs = 10000;
constexpr double kC7Budget = 1.0;
constexpr int kC9Instances = 100;
constexpr int kC10MinSeeds = 3;
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void progress(const std::string& msg) {
  std::fprintf(stderr, "  .. %s\n", msg.c_str());
  std::fflush(stderr);
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.2f") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(f, v[i]);
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// ---------------------------------------------------------------------------
// Criterion 1: reductions against an exhaustive pair enumeration.

double enumerated_min_pair(const std::vector<double>& q) {
  std::vector<double> mins;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (i < j) mins.push_back(q[i] < q[j] ? q[i] : q[j]);
    }
  }
  double sum = 0.0;
  for (double m : mins) sum += m;
  return sum / static_cast<double>(mins.size());
}

Verdict criterion1() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const int sizes[] = {2, 3, 5, 10};
  int bitwise_mismatch = 0;
  int order_violations = 0;
  for (int v = 0; v < kC1Vectors; ++v) {
    const int n = sizes[v % 4];
    std::vector<double> q(n);
    for (auto& x : q) x = uniform(rng, -100.0, 100.0);
    Rng unused(0);
    const double wmp = agent::reduce_target(q, agent::TargetStrategy::WeightedMinPair, unused);
    const double mn = agent::reduce_target(q, agent::TargetStrategy::MinQ, unused);
    const double mean = agent::reduce_target(q, agent::TargetStrategy::MeanQ, unused);
    if (std::bit_cast<std::uint64_t>(wmp) != std::bit_cast<std::uint64_t>(enumerated_min_pair(q))) ++bitwise_mismatch;
    if (!(mn <= wmp && wmp <= mean)) ++order_violations;
  }
  const std::vector<double> q123{1.0, 2.0, 3.0};
  Rng draw(102);
  double acc = 0.0;
  for (int i = 0; i < kC1Draws; ++i) acc += agent::reduce_target(q123, agent::TargetStrategy::RandomMinPair, draw);
  Rng unused(0);
  const double wmp123 = agent::reduce_target(q123, agent::TargetStrategy::WeightedMinPair, unused);
  const double rmp_mean = acc / kC1Draws;
  const double t = seconds_since(t0);
  Verdict out;
  out.pass = bitwise_mismatch == 0 && order_violations == 0 && std::abs(rmp_mean - wmp123) <= kC1MeanTol &&
             t < kC1Budget;
  out.detail = std::to_string(kC1Vectors) + " vectors, " + std::to_string(bitwise_mismatch) +
               " bitwise mismatches, " + std::to_string(order_violations) + " order violations; RandomMinPair mean " +
               fmt("%.4f", rmp_mean) + " vs WeightedMinPair " + fmt("%.4f", wmp123) + " (tol " +
               fmt("%.2f", kC1MeanTol) + "); " + fmt("%.2f", t) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 2: finite-difference checks of the critic and actor losses.

template <typename Loss>
double check_params(const nn::MlpD& net, Loss&& loss_with_grad) {
  auto loss = [&](std::span<const double> x) {
    nn::MlpD c = net;
    std::copy(x.begin(), x.end(), c.params().begin());
    return loss_with_grad(c, std::span<double>{});
  };
  auto grad = [&](std::span<const double> x) {
    nn::MlpD c = net;
    std::copy(x.begin(), x.end(), c.params().begin());
    std::vector<double> g(c.param_count(), 0.0);
    loss_with_grad(c, std::span<double>(g));
    return g;
  };
  const std::vector<double> x(net.params().begin(), net.params().end());
  return nn::grad_check(loss, grad, x);
}

Verdict criterion2() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int checks = 0;
  for (int c = 0; c < kC2Configs; ++c) {
    Rng rng(200 + static_cast<std::uint64_t>(c));
    std::uniform_int_distribution<int> dim(1, 4);
    std::uniform_int_distribution<int> width(4, 12);
    std::uniform_int_distribution<int> batch(2, 6);
    const int obs = dim(rng);
    const int act = std::min(dim(rng), 3);
    const int hidden = width(rng);
    // Smooth hidden units: central differences are meaningless across ReLU kinks.
    const auto activation = nn::Activation::tanh;
    const Eigen::Index B = batch(rng);
    const auto critic = nn::MlpD::uniform_init({obs + act, hidden, hidden, 1}, activation, nn::Activation::identity, rng);

    for (const bool cql : {false, true}) {
      for (const bool sunrise : {false, true}) {
        agent::kernels::CriticProblem<double> p;
        p.proposals = cql ? 2 * (1 + c % 3) : 0;
        p.cql_alpha = cql ? uniform(rng, 0.5, 10.0) : 0.0;
        p.inputs.resize(obs + act, B + B * p.proposals);
        for (Eigen::Index i = 0; i < p.inputs.size(); ++i) p.inputs.data()[i] = uniform(rng, -1.0, 1.0);
        p.targets.resize(B);
        p.td_weights.resize(B);
        for (Eigen::Index b = 0; b < B; ++b) {
          p.targets(b) = uniform(rng, -2.0, 2.0);
          p.td_weights(b) = sunrise ? agent::sunrise_weight(uniform(rng, 0.0, 2.0), uniform(rng, 0.0, 20.0)) : 1.0;
        }
        if (cql) {
          p.cql_weights = nn::Vector<double>::Ones(B);
          p.proposal_log_density.resize(B * p.proposals);
          for (Eigen::Index i = 0; i < p.proposal_log_density.size(); ++i) {
            p.proposal_log_density(i) = uniform(rng, -3.0, 1.0);
          }
        }
        worst = std::max(worst, check_params(critic, [&](const nn::MlpD& net, std::span<double> g) {
          return agent::kernels::critic_loss<double>(net, p, g).total;
        }));
        ++checks;
      }
    }

    const auto trunk = nn::MlpD::uniform_init({obs, hidden, 2 * act}, activation, nn::Activation::identity, rng);
    std::vector<nn::MlpD> critics;
    const int n_critics = 2 + c % 3;
    for (int k = 0; k < n_critics; ++k) {
      critics.push_back(nn::MlpD::uniform_init({obs + act, hidden, 1}, activation, nn::Activation::identity, rng));
    }
    nn::Matrix<double> o(obs, B);
    nn::Matrix<double> noise(act, B);
    for (Eigen::Index i = 0; i < o.size(); ++i) o.data()[i] = uniform(rng, -1.0, 1.0);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = standard_normal(rng);
    const double alpha = uniform(rng, 0.01, 1.0);
    for (const auto red : {agent::kernels::ActorReduction::min, agent::kernels::ActorReduction::mean}) {
      worst = std::max(worst, check_params(trunk, [&](const nn::MlpD& net, std::span<double> g) {
        return agent::kernels::actor_loss<double>(net, critics, o, noise, alpha, red, g).loss;
      }));
      ++checks;
    }
  }
  const double t = seconds_since(t0);
  Verdict out;
  out.pass = worst <= kC2MaxRelErr && t < kC2Budget;
  out.detail = std::to_string(kC2Configs) + " configurations, " + std::to_string(checks) +
               " gradient checks, max relative error " + fmt("%.2e", worst) + " (limit " + fmt("%.0e", kC2MaxRelErr) +
               "); " + fmt("%.1f", t) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// Shared run configuration and datasets.

struct Fixture {
  fs::path workdir;
  pipeline::RunConfig pendulum;
  pipeline::RunConfig pointmass;
  std::optional<env::Dataset> pendulum_data;
  std::optional<env::Dataset> pointmass_data;
};

pipeline::RunConfig naive_ablation(pipeline::RunConfig c) {
  c.agent.ensemble_size = 2;
  c.online.target_strategy = agent::TargetStrategy::MinQ;
  c.online.exploration = agent::Exploration::None;
  c.online.sunrise_temperature = 0.0;
  c.online.cql_alpha = 0.0;
  return c;
}

const env::Dataset& dataset_for(Fixture& fx, env::EnvId id) {
  auto& slot = id == env::EnvId::pendulum ? fx.pendulum_data : fx.pointmass_data;
  if (!slot) {
    const auto& cfg = id == env::EnvId::pendulum ? fx.pendulum : fx.pointmass;
    const fs::path path = fx.workdir / (env::to_string(id) + "-medium.e2od");
    progress("generating " + path.filename().string());
    slot = pipeline::generate_run_dataset(cfg);
    slot->save(path);
  }
  return *slot;
}

// ---------------------------------------------------------------------------
// Criterion 3: conservative gap on a frozen batch stream.

double uniform_minus_data_gap(const agent::QEnsemble& ens, const nn::Matrix<float>& obs,
                              const nn::Matrix<float>& data_actions, const nn::Matrix<float>& uniform_actions) {
  const nn::Matrix<float> qd = ens.q_values(obs, data_actions);
  const nn::Matrix<float> qu = ens.q_values(obs, uniform_actions);
  return qu.cast<double>().mean() - qd.cast<double>().mean();
}

Verdict criterion3(Fixture& fx) {
  const auto t0 = Clock::now();
  const auto& data = dataset_for(fx, env::EnvId::pendulum);
  const auto& cfg = fx.pendulum;
  const double t_data = seconds_since(t0);
  const auto t1 = Clock::now();

  const auto probe = pipeline::QProbe::from_dataset(data, kC3ProbeSize, 303);
  Rng urng(304);
  nn::Matrix<float> uniform_actions(cfg.env.act_dim, probe.obs.cols());
  for (Eigen::Index i = 0; i < uniform_actions.size(); ++i) {
    uniform_actions.data()[i] = static_cast<float>(uniform(urng, -1.0, 1.0));
  }

  std::vector<double> gap_cql;
  std::vector<double> gap_plain;
  int wins = 0;
  for (const auto seed : kSeeds) {
    double gaps[2] = {0.0, 0.0};
    for (int variant = 0; variant < 2; ++variant) {
      auto acfg = cfg.offline_agent_config();
      if (variant == 1) acfg.cql_alpha = 0.0;
      agent::Agent a(acfg, derive_seed(seed, 1));
      a.set_phase(agent::Phase::offline);
      replay::ReplayBuffer buffer(data.records.size(), cfg.env.obs_dim, cfg.env.act_dim, acfg.ensemble_size, 1.0);
      Rng fill(derive_seed(seed, 2));
      buffer.init_from_dataset(data, cfg.env.env_id, fill);
      // Batches come from their own stream so both variants see the same sequence.
      Rng batches(derive_seed(seed, 3));
      Rng updates(derive_seed(seed, 4));
      for (int i = 0; i < kC3Updates; ++i) a.update(buffer.sample_uniform(acfg.batch_size, batches), updates);
      gaps[variant] = uniform_minus_data_gap(a.ensemble(), probe.obs, probe.actions, uniform_actions);
    }
    gap_cql.push_back(gaps[0]);
    gap_plain.push_back(gaps[1]);
    if (gaps[0] < gaps[1]) ++wins;
    progress("criterion 3 seed " + std::to_string(seed) + ": gap cql " + fmt("%.3f", gaps[0]) + ", plain " +
             fmt("%.3f", gaps[1]));
  }
  const double t = seconds_since(t1);
  Verdict out;
  out.pass = wins == static_cast<int>(kSeeds.size()) && t < kC3Budget;
  out.detail = "mean Q(uniform) - mean Q(data) after " + std::to_string(kC3Updates) + " updates: alpha_cql=" +
               fmt("%g", cfg.agent.cql_alpha) + " [" + join(gap_cql, "%.3f") + "] vs alpha_cql=0 [" +
               join(gap_plain, "%.3f") + "], lower in " + std::to_string(wins) + "/5 seeds; " + fmt("%.0f", t) +
               " s (+" + fmt("%.0f", t_data) + " s dataset)";
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 4, 5, 6, 10: two-phase runs.

struct TwoPhase {
  pipeline::RunLog log;
  std::vector<std::uint8_t> offline_checkpoint;
  std::vector<std::uint8_t> online_checkpoint;
  diag::RunSummary summary;
};

TwoPhase run_two_phase(const pipeline::RunConfig& cfg, const env::Dataset& data,
                       const std::vector<std::uint8_t>* offline_checkpoint = nullptr) {
  TwoPhase r;
  if (offline_checkpoint) {
    r.offline_checkpoint = *offline_checkpoint;
  } else {
    r.offline_checkpoint = pipeline::train_offline(cfg, data, r.log).checkpoint;
  }
  r.online_checkpoint = pipeline::train_online(cfg, data, r.offline_checkpoint, r.log).checkpoint;
  r.summary = diag::summarize_run(r.log);
  return r;
}

struct Campaign {
  std::vector<TwoPhase> e2o_pendulum;
  std::vector<TwoPhase> naive_pendulum;
  std::vector<TwoPhase> e2o_pointmass;
  std::vector<TwoPhase> offline_data_pendulum;
  double seconds_e2o_pendulum = 0.0;
  double seconds_naive_pendulum = 0.0;
  double seconds_e2o_pointmass = 0.0;
  double seconds_c10 = 0.0;
  std::string error;
};

Campaign run_campaign(Fixture& fx, bool need_c10) {
  Campaign c;
  try {
    const auto& pend = dataset_for(fx, env::EnvId::pendulum);
    const auto& pm = dataset_for(fx, env::EnvId::pointmass);
    const auto t0 = Clock::now();
    for (const auto seed : kSeeds) {
      auto e2o = fx.pendulum;
      e2o.seed = seed;
      auto tr = Clock::now();
      c.e2o_pendulum.push_back(run_two_phase(e2o, pend));
      c.seconds_e2o_pendulum += seconds_since(tr);
      c.e2o_pendulum.back().log.save(fx.workdir / ("e2o_pendulum_seed" + std::to_string(seed) + ".csv"));
      auto naive = naive_ablation(fx.pendulum);
      naive.seed = seed;
      tr = Clock::now();
      c.naive_pendulum.push_back(run_two_phase(naive, pend));
      c.seconds_naive_pendulum += seconds_since(tr);
      c.naive_pendulum.back().log.save(fx.workdir / ("naive_pendulum_seed" + std::to_string(seed) + ".csv"));
      auto e2o_pm = fx.pointmass;
      e2o_pm.seed = seed;
      tr = Clock::now();
      c.e2o_pointmass.push_back(run_two_phase(e2o_pm, pm));
      c.seconds_e2o_pointmass += seconds_since(tr);
      c.e2o_pointmass.back().log.save(fx.workdir / ("e2o_pointmass_seed" + std::to_string(seed) + ".csv"));
      progress("seed " + std::to_string(seed) + ": e2o pendulum drop " +
               fmt("%.2f", c.e2o_pendulum.back().summary.max_drop) + " (offline " +
               fmt("%.1f", c.e2o_pendulum.back().summary.offline_final) + " -> final " +
               fmt("%.1f", c.e2o_pendulum.back().summary.final_score) + "), naive drop " +
               fmt("%.2f", c.naive_pendulum.back().summary.max_drop) + ", e2o pointmass " +
               fmt("%.1f", c.e2o_pointmass.back().summary.offline_final) + " -> " +
               fmt("%.1f", c.e2o_pointmass.back().summary.final_score) + " [" + fmt("%.0f", seconds_since(t0)) +
               " s]");
    }
    if (need_c10) {
      const auto t1 = Clock::now();
      for (std::size_t i = 0; i < kSeeds.size(); ++i) {
        auto keep = fx.pendulum;
        keep.seed = kSeeds[i];
        keep.use_offline_data_online = true;
        c.offline_data_pendulum.push_back(run_two_phase(keep, pend, &c.e2o_pendulum[i].offline_checkpoint));
      }
      c.seconds_c10 = seconds_since(t1);
    }
  } catch (const std::exception& e) {
    c.error = e.what();
  }
  return c;
}

Verdict criterion4(const Campaign& c) {
  if (!c.error.empty()) return {false, "runs failed: " + c.error};
  std::vector<double> e2o_drops;
  std::vector<double> naive_drops;
  int no_drop = 0;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    const auto& s = c.e2o_pendulum[i].summary;
    e2o_drops.push_back(s.max_drop);
    if (s.max_drop <= kC4DropFraction * s.offline_final) ++no_drop;
    naive_drops.push_back(c.naive_pendulum[i].summary.max_drop);
  }
  const double seconds = c.seconds_e2o_pendulum + c.seconds_naive_pendulum;
  Verdict out;
  out.pass = no_drop >= kC4MinSeeds && mean_of(naive_drops) > mean_of(e2o_drops) && seconds <= kC4Budget;
  out.detail = "E2O max drop [" + join(e2o_drops) + "], within 10% of offline final in " + std::to_string(no_drop) +
               "/5 (need " + std::to_string(kC4MinSeeds) + "); naive mean drop " + fmt("%.2f", mean_of(naive_drops)) +
               " vs E2O " + fmt("%.2f", mean_of(e2o_drops)) + "; " + fmt("%.0f", seconds) + " s (budget " +
               fmt("%.0f", kC4Budget) + ")";
  return out;
}

Verdict criterion5(const Campaign& c) {
  if (!c.error.empty()) return {false, "runs failed: " + c.error};
  auto gains = [](const std::vector<TwoPhase>& runs) {
    std::vector<double> g;
    for (const auto& r : runs) g.push_back(r.summary.final_score - r.summary.offline_final);
    return g;
  };
  const auto gp = gains(c.e2o_pendulum);
  const auto gm = gains(c.e2o_pointmass);
  const double seconds = c.seconds_e2o_pendulum + c.seconds_e2o_pointmass;
  Verdict out;
  out.pass = mean_of(gp) >= kC5MinGain && mean_of(gm) >= kC5MinGain && seconds <= kC4Budget;
  out.detail = "final - offline final: pendulum mean " + fmt("%.2f", mean_of(gp)) + " [" + join(gp) +
               "], pointmass mean " + fmt("%.2f", mean_of(gm)) + " [" + join(gm) + "] (need >= " +
               fmt("%.0f", kC5MinGain) + " each); " + fmt("%.0f", seconds) + " s (budget " +
               fmt("%.0f", kC4Budget) + ")";
  return out;
}

Verdict criterion6(const Campaign& c, Fixture& fx) {
  if (!c.error.empty()) return {false, "runs failed: " + c.error};
  const auto& data = dataset_for(fx, env::EnvId::pendulum);
  std::vector<double> online_d;
  std::vector<double> offline_d;
  int wider = 0;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    const auto off = agent::parse_checkpoint(c.e2o_pendulum[i].offline_checkpoint);
    const auto on = agent::parse_checkpoint(c.e2o_pendulum[i].online_checkpoint);
    Rng r_off(600 + kSeeds[i]);
    Rng r_on(600 + kSeeds[i]);
    offline_d.push_back(agent::action_distance(agent::policy_action_source(agent::SquashedGaussianPolicy(off.policy)),
                                               data, kC6Samples, r_off)
                            .mean_sq_dist);
    online_d.push_back(agent::action_distance(agent::policy_action_source(agent::SquashedGaussianPolicy(on.policy)),
                                              data, kC6Samples, r_on)
                           .mean_sq_dist);
    if (online_d.back() > offline_d.back()) ++wider;
  }
  // The uniform reference is compared against uniform dataset actions, where the closed form applies.
  bool uniform_ok = true;
  std::string uniform_detail;
  for (const auto id : {env::EnvId::pendulum, env::EnvId::pointmass}) {
    const auto spec = env::make_spec(id);
    env::Dataset u;
    u.records = env::collect_transitions(spec, env::uniform_random_policy(spec.act_dim), 20000, 601);
    u.header = {.env_id = id, .record_count = u.records.size(), .random_ref_score = -1.0, .expert_ref_score = 0.0};
    Rng r(602);
    const double d = agent::action_distance(agent::uniform_action_source(spec.act_dim), u, kC6Samples, r).mean_sq_dist;
    const double expect = 2.0 / 3.0 * spec.act_dim;
    if (std::abs(d - expect) > kC6UniformTol * expect) uniform_ok = false;
    uniform_detail += (uniform_detail.empty() ? "" : ", ") + std::string("act_dim ") + std::to_string(spec.act_dim) +
                      ": " + fmt("%.4f", d) + " vs " + fmt("%.4f", expect);
  }
  Verdict out;
  out.pass = wider == static_cast<int>(kSeeds.size()) && uniform_ok;
  out.detail = "mean squared action distance on pendulum-medium: online [" + join(online_d, "%.3f") +
               "] vs offline [" + join(offline_d, "%.3f") + "], wider in " + std::to_string(wider) +
               "/5; uniform reference " + uniform_detail + " (tol 10%)";
  return out;
}

Verdict criterion10(const Campaign& c) {
  if (!c.error.empty()) return {false, "runs failed: " + c.error};
  std::vector<double> auc_discard;
  std::vector<double> auc_keep;
  int wins = 0;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    auc_discard.push_back(c.e2o_pendulum[i].summary.auc);
    auc_keep.push_back(c.offline_data_pendulum[i].summary.auc);
    if (auc_discard.back() >= auc_keep.back()) ++wins;
  }
  Verdict out;
  out.pass = wins >= kC10MinSeeds;
  out.detail = "normalized-score AUC, offline data discarded [" + join(auc_discard, "%.0f") + "] vs kept [" +
               join(auc_keep, "%.0f") + "], discarded >= kept in " + std::to_string(wins) + "/5 (need " +
               std::to_string(kC10MinSeeds) + "); both variants completed; " + fmt("%.0f", c.seconds_c10) +
               " s for the kept-data runs";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 7: SUNRISE weight contract.

Verdict criterion7() {
  const auto t0 = Clock::now();
  Rng rng(701);
  int range = 0;
  int monotone = 0;
  int anchors = 0;
  for (int i = 0; i < kC7Pairs; ++i) {
    const double s = std::exp(uniform(rng, -10.0, 6.0));
    const double T = std::exp(uniform(rng, -10.0, 6.0));
    const double w = agent::sunrise_weight(s, T);
    if (!(w > 0.5 && w <= 1.0)) ++range;
    const double s2 = s * std::exp(uniform(rng, 0.0, 3.0));
    if (!(agent::sunrise_weight(s2, T) <= w)) ++monotone;
    if (agent::sunrise_weight(0.0, T) != 1.0 || agent::sunrise_weight(s, 0.0) != 1.0) ++anchors;
  }
  const double t = seconds_since(t0);
  Verdict out;
  out.pass = range == 0 && monotone == 0 && anchors == 0 && t < kC7Budget;
  out.detail = std::to_string(kC7Pairs) + " (std, T) pairs: " + std::to_string(range) + " outside (0.5, 1], " +
               std::to_string(monotone) + " monotonicity violations, " + std::to_string(anchors) +
               " anchor failures; " + fmt("%.3f", t) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 8: two full experiments with one config.

Verdict criterion8(const Fixture& fx) {
  pipeline::RunConfig c = fx.pointmass;
  c.dataset_path.clear();
  c.dataset_size = 2000;
  c.reference_steps = 5000;
  c.offline_steps = 500;
  c.online_env_steps = 500;
  c.eval_interval = 250;
  c.eval_episodes = 3;
  c.seed = 8;
  std::vector<std::string> logs;
  for (int i = 0; i < 2; ++i) {
    c.output_dir = (fx.workdir / ("determinism_" + std::to_string(i))).string();
    fs::remove_all(c.output_dir);
    const auto r = pipeline::run_experiment(c);
    if (!r.ok) return {false, "run " + std::to_string(i) + " failed in " + r.failed_stage + ": " + r.error};
    const auto bytes = io::read_file(fs::path(c.output_dir) / pipeline::artifact::kRunLog);
    logs.emplace_back(bytes.begin(), bytes.end());
  }
  Verdict out;
  out.pass = logs[0] == logs[1] && !logs[0].empty();
  out.detail = "two run_experiment invocations (dataset generation, offline, online): runlog.csv " +
               std::string(out.pass ? "byte-identical" : "differs") + " (" + std::to_string(logs[0].size()) +
               " bytes)";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 9: randomized save/load/save round-trips.

env::Dataset random_dataset(Rng& rng) {
  const auto id = rng() % 2 == 0 ? env::EnvId::pendulum : env::EnvId::pointmass;
  const auto spec = env::make_spec(id);
  env::Dataset d;
  const std::size_t n = 1 + rng() % 400;
  for (std::size_t i = 0; i < n; ++i) {
    env::TransitionRecord r;
    for (int k = 0; k < spec.obs_dim; ++k) r.obs.push_back(static_cast<float>(uniform(rng, -10.0, 10.0)));
    for (int k = 0; k < spec.act_dim; ++k) r.action.push_back(static_cast<float>(uniform(rng, -1.0, 1.0)));
    r.reward = static_cast<float>(uniform(rng, -20.0, 1.0));
    for (int k = 0; k < spec.obs_dim; ++k) r.next_obs.push_back(static_cast<float>(uniform(rng, -10.0, 10.0)));
    const auto flag = rng() % 4;
    r.done = flag == 1;
    r.truncated = flag == 2;
    d.records.push_back(std::move(r));
  }
  const double random_ref = uniform(rng, -2000.0, 0.0);
  d.header = {.env_id = id,
              .kind = static_cast<env::DatasetKind>(rng() % 3),
              .record_count = n,
              .random_ref_score = random_ref,
              .expert_ref_score = random_ref + uniform(rng, 1.0, 1000.0),
              .generator_seed = rng()};
  return d;
}

std::vector<std::uint8_t> random_checkpoint(Rng& rng, agent::AgentConfig& cfg, env::EnvId& id) {
  id = rng() % 2 == 0 ? env::EnvId::pendulum : env::EnvId::pointmass;
  const auto spec = env::make_spec(id);
  cfg = agent::AgentConfig{};
  cfg.obs_dim = spec.obs_dim;
  cfg.act_dim = spec.act_dim;
  cfg.hidden_sizes.assign(1 + rng() % 3, 0);
  for (auto& h : cfg.hidden_sizes) h = 2 + static_cast<int>(rng() % 14);
  cfg.ensemble_size = 2 + static_cast<int>(rng() % 5);
  cfg.batch_size = 8;
  cfg.cql_num_sampled_actions = 2;
  agent::Agent a(cfg, rng());
  a.set_phase(rng() % 2 == 0 ? agent::Phase::offline : agent::Phase::online);
  // A few updates populate optimizer moments and move targets away from the online nets.
  replay::ReplayBuffer buf(64, spec.obs_dim, spec.act_dim, cfg.ensemble_size, 1.0);
  const auto recs = env::collect_transitions(spec, env::uniform_random_policy(spec.act_dim), 64, rng());
  for (const auto& r : recs) buf.push(r, rng);
  const int steps = static_cast<int>(rng() % 3);
  for (int i = 0; i < steps; ++i) a.update(buf.sample_uniform(cfg.batch_size, rng), rng);
  return a.save_checkpoint(id);
}

Verdict criterion9(const Fixture& fx) {
  Rng rng(901);
  int dataset_ok = 0;
  int checkpoint_ok = 0;
  const fs::path dir = fx.workdir / "roundtrip";
  fs::create_directories(dir);
  for (int i = 0; i < kC9Instances; ++i) {
    const auto d = random_dataset(rng);
    const fs::path p1 = dir / "a.e2od";
    const fs::path p2 = dir / "b.e2od";
    d.save(p1);
    env::Dataset::load(p1).save(p2);
    if (io::read_file(p1) == io::read_file(p2)) ++dataset_ok;

    agent::AgentConfig cfg;
    env::EnvId id{};
    const auto bytes = random_checkpoint(rng, cfg, id);
    const fs::path c1 = dir / "a.e2oc";
    const fs::path c2 = dir / "b.e2oc";
    io::write_file(c1, bytes);
    const auto loaded = agent::Agent::from_checkpoint(agent::parse_checkpoint(io::read_file(c1)), cfg);
    io::write_file(c2, loaded.save_checkpoint(id));
    if (io::read_file(c1) == io::read_file(c2)) ++checkpoint_ok;
  }
  Verdict out;
  out.pass = dataset_ok == kC9Instances && checkpoint_ok == kC9Instances;
  out.detail = "save -> load -> save byte-identical: datasets " + std::to_string(dataset_ok) + "/" +
               std::to_string(kC9Instances) + ", checkpoints " + std::to_string(checkpoint_ok) + "/" +
               std::to_string(kC9Instances);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"e2o acceptance criteria"};
  std::string workdir = "acceptance_work";
  std::string config_path = E2O_ACCEPTANCE_CONFIG;
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for datasets, logs and checkpoints");
  app.add_option("--config", config_path, "Pendulum run config; pointmass uses the same settings")
      ->check(CLI::ExistingFile);
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };

  Fixture fx;
  fx.workdir = workdir;
  fs::create_directories(fx.workdir);
  try {
    fx.pendulum = pipeline::load_run_config(config_path);
    fx.pendulum.dataset_path.clear();
    fx.pointmass = fx.pendulum;
    pipeline::set_config_value(fx.pointmass, "env", "pointmass");
  } catch (const std::exception& e) {
    std::printf("FAIL cannot load %s: %s\n", config_path.c_str(), e.what());
    return 1;
  }

  std::map<int, Verdict> verdicts;
  auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Verdict{false, std::string("exception: ") + e.what()};
    }
  };
  const char* names[] = {"",
                         "reduction oracle equivalence",
                         "gradient fidelity",
                         "CQL conservatism",
                         "no-drop handoff",
                         "online improvement",
                         "action diversity",
                         "SUNRISE weight contract",
                         "determinism",
                         "format round-trips",
                         "offline-data ablation"};
  auto report = [&](int n, const Verdict& v) {
    verdicts[n] = v;
    std::printf("criterion %2d %s: %s -- %s\n", n, v.pass ? "PASS" : "FAIL", names[n], v.detail.c_str());
    std::fflush(stdout);
  };

  if (wanted(1)) report(1, guarded(criterion1));
  if (wanted(7)) report(7, guarded(criterion7));
  if (wanted(9)) report(9, guarded([&] { return criterion9(fx); }));
  if (wanted(2)) report(2, guarded(criterion2));
  if (wanted(8)) report(8, guarded([&] { return criterion8(fx); }));
  if (wanted(3)) report(3, guarded([&] { return criterion3(fx); }));
  if (wanted(4) || wanted(5) || wanted(6) || wanted(10)) {
    const Campaign c = run_campaign(fx, wanted(10));
    if (wanted(4)) report(4, guarded([&] { return criterion4(c); }));
    if (wanted(5)) report(5, guarded([&] { return criterion5(c); }));
    if (wanted(6)) report(6, guarded([&] { return criterion6(c, fx); }));
    if (wanted(10)) report(10, guarded([&] { return criterion10(c); }));
  }

  int failed = 0;
  for (const auto& [n, v] : verdicts) failed += v.pass ? 0 : 1;
  std::printf("%zu criteria run, %d failed\n", verdicts.size(), failed);
  return failed == 0 ? 0 : 1;
}
