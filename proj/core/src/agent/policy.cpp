#include "e2o/agent/policy.hpp"

#include <string>

#include "e2o/agent/kernels.hpp"
#include "e2o/errors.hpp"

namespace e2o::agent {

namespace {

void require_finite(const nn::Matrix<float>& m, const char* what) {
  if (!m.allFinite()) throw DiagnosticError(std::string("policy produced non-finite ") + what);
}

}  // namespace

nn::Matrix<float> standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  nn::Matrix<float> m(rows, cols);
  std::normal_distribution<float> n(0.0f, 1.0f);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  }
  return m;
}

SquashedGaussianPolicy::SquashedGaussianPolicy(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& rng) {
  std::vector<int> dims{obs_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(2 * act_dim);
  trunk_ = nn::Mlp::uniform_init(std::move(dims), nn::Activation::relu, nn::Activation::identity, rng);
}

SquashedGaussianPolicy::SquashedGaussianPolicy(nn::Mlp trunk) : trunk_(std::move(trunk)) {
  if (trunk_.output_dim() % 2 != 0) throw ShapeError("policy trunk output must hold a mean and a log-std per action");
}

SquashedGaussianPolicy::Sample SquashedGaussianPolicy::sample_with_noise(const nn::Matrix<float>& obs,
                                                                         const nn::Matrix<float>& noise) const {
  const nn::Matrix<float> out = trunk_.forward(obs);
  require_finite(out, "trunk output");
  auto s = kernels::squash_sample<float>(out, noise);
  return {std::move(s.action), std::move(s.log_prob)};
}

SquashedGaussianPolicy::Sample SquashedGaussianPolicy::sample(const nn::Matrix<float>& obs, Rng& rng,
                                                              bool deterministic) const {
  if (deterministic) return {deterministic_actions(obs), {}};
  return sample_with_noise(obs, standard_normal_matrix(act_dim(), obs.cols(), rng));
}

nn::Matrix<float> SquashedGaussianPolicy::deterministic_actions(const nn::Matrix<float>& obs) const {
  const nn::Matrix<float> out = trunk_.forward(obs);
  require_finite(out, "trunk output");
  return kernels::squash<float>(out.topRows(act_dim()));
}

nn::Vector<float> SquashedGaussianPolicy::log_prob(const nn::Matrix<float>& obs,
                                                   const nn::Matrix<float>& actions) const {
  if (actions.rows() != act_dim() || actions.cols() != obs.cols()) throw ShapeError("log_prob: action shape mismatch");
  return kernels::squashed_log_prob<float>(trunk_.forward(obs), actions);
}

std::pair<std::vector<float>, std::optional<float>> sample_action(const SquashedGaussianPolicy& policy,
                                                                  std::span<const float> obs, Rng& rng,
                                                                  bool deterministic) {
  if (static_cast<int>(obs.size()) != policy.obs_dim()) {
    throw ShapeError("observation width " + std::to_string(obs.size()) + " does not match policy input width " +
                     std::to_string(policy.obs_dim()));
  }
  nn::Matrix<float> o(policy.obs_dim(), 1);
  for (int i = 0; i < policy.obs_dim(); ++i) o(i, 0) = obs[i];
  auto s = policy.sample(o, rng, deterministic);
  std::vector<float> a(s.actions.data(), s.actions.data() + s.actions.size());
  if (deterministic) return {std::move(a), std::nullopt};
  return {std::move(a), s.log_probs(0)};
}

}  // namespace e2o::agent
