#include "e2o/agent/ensemble.hpp"

#include "e2o/errors.hpp"

namespace e2o::agent {

QEnsemble QEnsemble::create(const AgentConfig& config, Rng& rng) {
  std::vector<int> dims{config.obs_dim + config.act_dim};
  dims.insert(dims.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
  dims.push_back(1);
  QEnsemble e;
  for (int k = 0; k < config.ensemble_size; ++k) {
    e.online.push_back(nn::Mlp::uniform_init(dims, nn::Activation::relu, nn::Activation::identity, rng));
    e.target.push_back(e.online.back());
    e.optim.push_back(nn::AdamState::fresh(e.online.back().param_count(), static_cast<float>(config.critic_lr)));
  }
  return e;
}

nn::Matrix<float> QEnsemble::join(const nn::Matrix<float>& obs, const nn::Matrix<float>& actions) {
  if (obs.cols() != actions.cols()) throw ShapeError("observation and action batches differ in size");
  nn::Matrix<float> in(obs.rows() + actions.rows(), obs.cols());
  in.topRows(obs.rows()) = obs;
  in.bottomRows(actions.rows()) = actions;
  return in;
}

nn::Matrix<float> QEnsemble::q_values(const nn::Matrix<float>& obs, const nn::Matrix<float>& actions,
                                      bool use_target) const {
  const nn::Matrix<float> in = join(obs, actions);
  const auto& nets = use_target ? target : online;
  nn::Matrix<float> q(static_cast<Eigen::Index>(nets.size()), obs.cols());
  for (std::size_t k = 0; k < nets.size(); ++k) q.row(static_cast<Eigen::Index>(k)) = nets[k].forward(in);
  return q;
}

void QEnsemble::polyak(double tau) {
  for (std::size_t k = 0; k < online.size(); ++k) nn::polyak_update(target[k].params(), online[k].params(), tau);
}

}  // namespace e2o::agent
