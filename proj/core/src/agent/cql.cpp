#include "e2o/agent/cql.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "e2o/errors.hpp"

namespace e2o::agent {

double importance_logsumexp(std::span<const double> q, std::span<const double> log_density) {
  if (q.empty() || q.size() != log_density.size()) throw ShapeError("importance_logsumexp: mismatched inputs");
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < q.size(); ++j) zmax = std::max(zmax, q[j] - log_density[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) sum += std::exp(q[j] - log_density[j] - zmax);
  const double out = zmax + std::log(sum) - std::log(static_cast<double>(q.size()));
  if (!std::isfinite(out)) throw DiagnosticError("non-finite CQL logsumexp estimate");
  return out;
}

std::vector<double> cql_penalty(const QEnsemble& ensemble, const SquashedGaussianPolicy& policy,
                                const nn::Matrix<float>& obs, const nn::Matrix<float>& actions, int num_sampled,
                                Rng& rng) {
  if (num_sampled < 1) throw ConfigError("cql_penalty needs at least one sampled action");
  const Eigen::Index B = obs.cols();
  const int M = num_sampled;
  const Eigen::Index act = actions.rows();
  if (actions.cols() != B) throw ShapeError("cql_penalty: observation and action batches differ in size");

  nn::Matrix<float> rep_obs(obs.rows(), B * 2 * M);
  nn::Matrix<float> rep_act(act, B * 2 * M);
  std::vector<double> log_density(static_cast<std::size_t>(B * 2 * M));
  std::uniform_real_distribution<float> unif(-1.0f, 1.0f);
  nn::Matrix<float> pol_obs(obs.rows(), B * M);
  for (Eigen::Index b = 0; b < B; ++b) {
    for (int j = 0; j < M; ++j) pol_obs.col(b * M + j) = obs.col(b);
  }
  const auto pol = policy.sample(pol_obs, rng, false);
  const double log_uniform = -static_cast<double>(act) * std::numbers::ln2;
  for (Eigen::Index b = 0; b < B; ++b) {
    for (int j = 0; j < 2 * M; ++j) {
      const Eigen::Index c = b * 2 * M + j;
      rep_obs.col(c) = obs.col(b);
      if (j < M) {
        for (Eigen::Index i = 0; i < act; ++i) rep_act(i, c) = unif(rng);
        log_density[c] = log_uniform;
      } else {
        rep_act.col(c) = pol.actions.col(b * M + (j - M));
        log_density[c] = pol.log_probs(b * M + (j - M));
      }
    }
  }
  const nn::Matrix<float> q_prop = ensemble.q_values(rep_obs, rep_act);
  const nn::Matrix<float> q_data = ensemble.q_values(obs, actions);
  std::vector<double> out(static_cast<std::size_t>(ensemble.size()), 0.0);
  std::vector<double> q(static_cast<std::size_t>(2 * M));
  for (int k = 0; k < ensemble.size(); ++k) {
    for (Eigen::Index b = 0; b < B; ++b) {
      for (int j = 0; j < 2 * M; ++j) q[j] = q_prop(k, b * 2 * M + j);
      out[k] += importance_logsumexp(q, std::span<const double>(log_density).subspan(b * 2 * M, 2 * M)) - q_data(k, b);
    }
    out[k] /= static_cast<double>(B);
  }
  return out;
}

}  // namespace e2o::agent
