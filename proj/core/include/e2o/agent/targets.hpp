#pragma once

#include <span>
#include <vector>

#include "e2o/agent/config.hpp"
#include "e2o/random.hpp"

namespace e2o::agent {

/// Collapses the N ensemble values at one next state-action into one target value.
double reduce_target(std::span<const double> q_values, TargetStrategy strategy, Rng& rng);

/// i.i.d. uniform(0,1) draws normalized to sum to 1.
std::vector<double> rem_weights(std::size_t n, Rng& rng);

/// (1/C(N,2)) * sum over i<j of min(q_i, q_j), enumerated in (i, j) lexicographic order.
double weighted_min_pair(std::span<const double> q_values);

/// reward + (1 - done) * gamma * (reduced_next_q - alpha * next_log_prob).
double td_target(double reward, bool done, double gamma, double reduced_next_q, double alpha, double next_log_prob);

/// sigmoid(-std * T) + 0.5; lies in (0.5, 1].
double sunrise_weight(double next_q_std, double temperature);

}  // namespace e2o::agent
