#include <benchmark/benchmark.h>

#include "e2o/agent/agent.hpp"
#include "e2o/agent/targets.hpp"
#include "e2o/env/envs.hpp"
#include "e2o/env/rollout.hpp"
#include "e2o/nn/mlp.hpp"
#include "e2o/replay/buffer.hpp"

using namespace e2o;

namespace {

nn::Matrix<float> random_matrix(int rows, int cols, Rng& rng) {
  nn::Matrix<float> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(uniform(rng, -1.0, 1.0));
  return m;
}

void BM_MlpForward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const int batch = static_cast<int>(state.range(1));
  Rng rng(1);
  const auto net = nn::Mlp::uniform_init({4, width, width, 1}, nn::Activation::relu, nn::Activation::identity, rng);
  const auto x = random_matrix(4, batch, rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForward)->Args({64, 128})->Args({256, 256});

void BM_MlpBackward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const int batch = static_cast<int>(state.range(1));
  Rng rng(2);
  const auto net = nn::Mlp::uniform_init({4, width, width, 1}, nn::Activation::relu, nn::Activation::identity, rng);
  const auto x = random_matrix(4, batch, rng);
  const auto up = random_matrix(1, batch, rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.backward(x, up));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpBackward)->Args({64, 128})->Args({256, 256});

replay::ReplayBuffer filled_buffer(const env::EnvSpec& spec, int ensemble, Rng& rng) {
  replay::ReplayBuffer buf(5000, spec.obs_dim, spec.act_dim, ensemble, 1.0);
  for (const auto& r : env::collect_transitions(spec, env::uniform_random_policy(spec.act_dim), 5000, 3)) {
    buf.push(r, rng);
  }
  return buf;
}

void BM_AgentUpdate(benchmark::State& state) {
  const int ensemble = static_cast<int>(state.range(0));
  const bool cql = state.range(1) != 0;
  const auto spec = env::make_spec(env::EnvId::pendulum);
  agent::AgentConfig cfg;
  cfg.obs_dim = spec.obs_dim;
  cfg.act_dim = spec.act_dim;
  cfg.hidden_sizes = {64, 64};
  cfg.ensemble_size = ensemble;
  cfg.batch_size = 128;
  cfg.cql_alpha = cql ? 10.0 : 0.0;
  cfg.cql_num_sampled_actions = 5;
  Rng rng(4);
  agent::Agent a(cfg, 5);
  const auto buf = filled_buffer(spec, ensemble, rng);
  for (auto _ : state) benchmark::DoNotOptimize(a.update(buf.sample_uniform(cfg.batch_size, rng), rng));
}
BENCHMARK(BM_AgentUpdate)->Args({2, 0})->Args({10, 0})->Args({10, 1})->Unit(benchmark::kMillisecond);

void BM_WeightedMinPair(benchmark::State& state) {
  Rng rng(6);
  std::vector<double> q(static_cast<std::size_t>(state.range(0)));
  for (auto& v : q) v = uniform(rng, -10.0, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(agent::weighted_min_pair(q));
}
BENCHMARK(BM_WeightedMinPair)->Arg(2)->Arg(10);

void BM_ReplaySample(benchmark::State& state) {
  const auto spec = env::make_spec(env::EnvId::pendulum);
  Rng rng(7);
  const auto buf = filled_buffer(spec, 10, rng);
  for (auto _ : state) benchmark::DoNotOptimize(buf.sample_uniform(256, rng));
}
BENCHMARK(BM_ReplaySample);

}  // namespace

BENCHMARK_MAIN();
