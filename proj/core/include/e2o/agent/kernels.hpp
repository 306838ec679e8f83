#pragma once

// Loss kernels shared by the single-precision training path and the
// double-precision gradient checks. Everything here is a pure function of
// its arguments; randomness (noise, proposals) is drawn by the caller.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "e2o/errors.hpp"
#include "e2o/nn/mlp.hpp"

namespace e2o::agent::kernels {

template <typename S>
using Mat = nn::Matrix<S>;
template <typename S>
using Vec = nn::Vector<S>;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// log(1 - tanh(u)^2), evaluated without cancellation for large |u|.
template <typename S>
S log1m_tanh_sq(S u) {
  using std::abs;
  using std::exp;
  using std::log1p;
  const S x = S(-2) * u;
  const S softplus = std::max(x, S(0)) + log1p(exp(-abs(x)));
  return S(2) * (S(std::numbers::ln2) - u - softplus);
}

/// tanh, kept strictly inside (-1, 1) where rounding would reach the bounds.
template <typename S>
Mat<S> squash(const Mat<S>& pre_tanh) {
  const S edge = S(1) - std::numeric_limits<S>::epsilon();
  return pre_tanh.array().tanh().cwiseMax(-edge).cwiseMin(edge).matrix();
}

/// Reparameterized tanh-Gaussian sample for a batch. The trunk output holds
/// means in its first act_dim rows and unclamped log-stds in the rest.
template <typename S>
struct SquashedSample {
  Mat<S> mean;
  Mat<S> log_std;
  Mat<S> std;
  Mat<S> pre_tanh;
  Mat<S> action;
  Vec<S> log_prob;
  BoolArray log_std_clamped;
};

template <typename S>
SquashedSample<S> squash_sample(const Mat<S>& trunk_out, const Mat<S>& noise) {
  const Eigen::Index act = trunk_out.rows() / 2;
  if (trunk_out.rows() != 2 * act || noise.rows() != act || noise.cols() != trunk_out.cols()) {
    throw ShapeError("squash_sample: noise must be act_dim x batch for a 2*act_dim trunk output");
  }
  SquashedSample<S> s;
  s.mean = trunk_out.topRows(act);
  const Mat<S> raw = trunk_out.bottomRows(act);
  s.log_std_clamped = (raw.array() < S(kLogStdMin)) || (raw.array() > S(kLogStdMax));
  s.log_std = raw.cwiseMax(S(kLogStdMin)).cwiseMin(S(kLogStdMax));
  s.std = s.log_std.array().exp().matrix();
  s.pre_tanh = s.mean + s.std.cwiseProduct(noise);
  s.action = squash(s.pre_tanh);
  const S half_log_2pi = S(0.5 * std::log(2.0 * std::numbers::pi));
  s.log_prob.resize(trunk_out.cols());
  for (Eigen::Index b = 0; b < trunk_out.cols(); ++b) {
    S lp = S(0);
    for (Eigen::Index i = 0; i < act; ++i) {
      const S e = noise(i, b);
      lp += S(-0.5) * e * e - s.log_std(i, b) - half_log_2pi - log1m_tanh_sq(s.pre_tanh(i, b));
    }
    s.log_prob(b) = lp;
  }
  return s;
}

/// Gradient with respect to the trunk output, given upstream gradients for
/// the squashed actions and their log-densities (noise held fixed).
template <typename S>
Mat<S> squash_backward(const SquashedSample<S>& s, const Mat<S>& noise, const Mat<S>& d_action,
                       const Vec<S>& d_log_prob) {
  const Eigen::Index act = s.mean.rows();
  const Eigen::Index batch = s.mean.cols();
  Mat<S> d_trunk(2 * act, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index i = 0; i < act; ++i) {
      const S a = s.action(i, b);
      // d log_prob / d u = 2 tanh(u); d action / d u = 1 - tanh(u)^2.
      const S d_u = d_action(i, b) * (S(1) - a * a) + S(2) * a * d_log_prob(b);
      d_trunk(i, b) = d_u;
      const S d_log_std = d_u * s.std(i, b) * noise(i, b) - d_log_prob(b);
      d_trunk(act + i, b) = s.log_std_clamped(i, b) ? S(0) : d_log_std;
    }
  }
  return d_trunk;
}

/// Log-density of given squashed actions (strictly inside (-1, 1)).
template <typename S>
Vec<S> squashed_log_prob(const Mat<S>& trunk_out, const Mat<S>& actions) {
  using std::atanh;
  const Eigen::Index act = trunk_out.rows() / 2;
  Vec<S> out(trunk_out.cols());
  const S half_log_2pi = S(0.5 * std::log(2.0 * std::numbers::pi));
  for (Eigen::Index b = 0; b < trunk_out.cols(); ++b) {
    S lp = S(0);
    for (Eigen::Index i = 0; i < act; ++i) {
      const S log_std = std::clamp(trunk_out(act + i, b), S(kLogStdMin), S(kLogStdMax));
      const S u = atanh(actions(i, b));
      const S e = (u - trunk_out(i, b)) / std::exp(log_std);
      lp += S(-0.5) * e * e - log_std - half_log_2pi - log1m_tanh_sq(u);
    }
    out(b) = lp;
  }
  return out;
}

/// Regression problem for one critic. Columns of `inputs` are the B data
/// pairs followed by `proposals` CQL proposal actions per sample
/// (sample b owns columns B + b*P ... B + b*P + P - 1).
template <typename S>
struct CriticProblem {
  Mat<S> inputs;
  Vec<S> targets;
  Vec<S> td_weights;
  Vec<S> cql_weights;
  Vec<S> proposal_log_density;
  int proposals = 0;
  S cql_alpha = S(0);

  Eigen::Index batch() const { return targets.size(); }
};

struct CriticTerms {
  double td_loss = 0.0;
  double cql_penalty = 0.0;
  double total = 0.0;
};

/// (1/B) sum_b w_b (Q(s_b,a_b) - y_b)^2
///   + cql_alpha * (1/B) sum_b c_b (log((1/P) sum_j exp(Q(s_b,a_bj) - log mu_bj)) - Q(s_b,a_b)).
/// Accumulates the parameter gradient into `grad` unless it is empty and
/// optionally reports the B data-pair predictions.
template <typename S>
CriticTerms critic_loss(const nn::BasicMlp<S>& net, const CriticProblem<S>& p, std::span<S> grad,
                        Vec<S>* data_q = nullptr) {
  const Eigen::Index B = p.batch();
  const Eigen::Index P = p.proposals;
  if (p.inputs.cols() != B + B * P) throw ShapeError("critic problem: input columns do not match batch layout");
  if (p.td_weights.size() != B) throw ShapeError("critic problem: td weights do not match batch");
  if (P > 0 && (p.cql_weights.size() != B || p.proposal_log_density.size() != B * P)) {
    throw ShapeError("critic problem: CQL weights or densities do not match batch");
  }
  typename nn::BasicMlp<S>::Tape tape;
  const Mat<S> q = net.forward(p.inputs, tape);
  if (data_q != nullptr) *data_q = q.leftCols(B).transpose();
  Mat<S> up = Mat<S>::Zero(1, q.cols());
  const S inv_b = S(1) / static_cast<S>(B);

  S td = S(0);
  for (Eigen::Index b = 0; b < B; ++b) {
    const S err = q(0, b) - p.targets(b);
    td += p.td_weights(b) * err * err;
    up(0, b) += S(2) * p.td_weights(b) * err * inv_b;
  }
  S penalty = S(0);
  if (P > 0) {
    const S log_p = std::log(static_cast<S>(P));
    std::vector<S> z(static_cast<std::size_t>(P));
    for (Eigen::Index b = 0; b < B; ++b) {
      S zmax = -std::numeric_limits<S>::infinity();
      for (Eigen::Index j = 0; j < P; ++j) {
        z[j] = q(0, B + b * P + j) - p.proposal_log_density(b * P + j);
        zmax = std::max(zmax, z[j]);
      }
      S sum = S(0);
      for (Eigen::Index j = 0; j < P; ++j) {
        z[j] = std::exp(z[j] - zmax);
        sum += z[j];
      }
      const S lse = zmax + std::log(sum) - log_p;
      penalty += p.cql_weights(b) * (lse - q(0, b));
      const S scale = p.cql_alpha * p.cql_weights(b) * inv_b;
      up(0, b) -= scale;
      for (Eigen::Index j = 0; j < P; ++j) up(0, B + b * P + j) += scale * z[j] / sum;
    }
  }
  CriticTerms terms;
  terms.td_loss = static_cast<double>(td * inv_b);
  terms.cql_penalty = static_cast<double>(penalty * inv_b);
  terms.total = terms.td_loss + static_cast<double>(p.cql_alpha) * terms.cql_penalty;
  if (!grad.empty()) net.backward(tape, up, grad, false);
  return terms;
}

enum class ActorReduction { min, mean };

struct ActorTerms {
  double loss = 0.0;
  double mean_log_prob = 0.0;
};

/// mean_b [alpha * log pi(a_b|s_b) - rho(Q_1..Q_N)(s_b, a_b)] with a_b the
/// reparameterized sample under `noise`. Gradient w.r.t. the trunk parameters
/// is accumulated into `grad` unless it is empty; critics are held fixed.
template <typename S>
ActorTerms actor_loss(const nn::BasicMlp<S>& trunk, std::span<const nn::BasicMlp<S>> critics, const Mat<S>& obs,
                      const Mat<S>& noise, S alpha, ActorReduction reduction, std::span<S> grad) {
  const Eigen::Index B = obs.cols();
  const Eigen::Index obs_dim = obs.rows();
  const std::size_t N = critics.size();
  if (N == 0) throw ShapeError("actor_loss needs at least one critic");
  typename nn::BasicMlp<S>::Tape trunk_tape;
  const Mat<S> trunk_out = trunk.forward(obs, trunk_tape);
  const SquashedSample<S> s = squash_sample(trunk_out, noise);
  const Eigen::Index act = s.action.rows();

  Mat<S> critic_in(obs_dim + act, B);
  critic_in.topRows(obs_dim) = obs;
  critic_in.bottomRows(act) = s.action;
  std::vector<typename nn::BasicMlp<S>::Tape> tapes(N);
  Mat<S> q(N, B);
  for (std::size_t k = 0; k < N; ++k) q.row(static_cast<Eigen::Index>(k)) = critics[k].forward(critic_in, tapes[k]);

  std::vector<Eigen::Index> argmin(static_cast<std::size_t>(B), 0);
  S loss = S(0);
  for (Eigen::Index b = 0; b < B; ++b) {
    S rho;
    if (reduction == ActorReduction::min) {
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(N); ++k) {
        if (q(k, b) < q(best, b)) best = k;
      }
      argmin[b] = best;
      rho = q(best, b);
    } else {
      rho = q.col(b).sum() / static_cast<S>(N);
    }
    loss += alpha * s.log_prob(b) - rho;
  }
  const S inv_b = S(1) / static_cast<S>(B);
  ActorTerms terms;
  terms.loss = static_cast<double>(loss * inv_b);
  terms.mean_log_prob = static_cast<double>(s.log_prob.mean());
  if (grad.empty()) return terms;

  Mat<S> d_action = Mat<S>::Zero(act, B);
  for (std::size_t k = 0; k < N; ++k) {
    Mat<S> up = Mat<S>::Zero(1, B);
    bool any = false;
    for (Eigen::Index b = 0; b < B; ++b) {
      if (reduction == ActorReduction::mean) {
        up(0, b) = -inv_b / static_cast<S>(N);
        any = true;
      } else if (argmin[b] == static_cast<Eigen::Index>(k)) {
        up(0, b) = -inv_b;
        any = true;
      }
    }
    if (!any) continue;
    const Mat<S> d_in = critics[k].backward(tapes[k], up, {}, true);
    d_action += d_in.bottomRows(act);
  }
  const Vec<S> d_log_prob = Vec<S>::Constant(B, alpha * inv_b);
  const Mat<S> d_trunk = squash_backward(s, noise, d_action, d_log_prob);
  trunk.backward(trunk_tape, d_trunk, grad, false);
  return terms;
}

}  // namespace e2o::agent::kernels
