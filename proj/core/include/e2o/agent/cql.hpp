#pragma once

#include <span>
#include <vector>

#include "e2o/agent/ensemble.hpp"
#include "e2o/agent/policy.hpp"
#include "e2o/random.hpp"

namespace e2o::agent {

/// log((1/P) * sum_j exp(q_j - log_density_j)), evaluated with max subtraction.
double importance_logsumexp(std::span<const double> q, std::span<const double> log_density);

/// CQL(H) penalty per critic: mean over the batch of the importance-sampled
/// logsumexp over M uniform and M policy proposals minus Q on the data action.
std::vector<double> cql_penalty(const QEnsemble& ensemble, const SquashedGaussianPolicy& policy,
                                const nn::Matrix<float>& obs, const nn::Matrix<float>& actions, int num_sampled,
                                Rng& rng);

}  // namespace e2o::agent
