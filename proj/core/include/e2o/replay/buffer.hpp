#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "e2o/env/dataset.hpp"
#include "e2o/random.hpp"
#include "e2o/replay/batch.hpp"

namespace e2o::replay {

/// Fixed-capacity FIFO transition store with per-record bootstrap masks.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim, int ensemble_size, double mask_prob);

  /// Stores a record and draws its mask row i.i.d. Bernoulli(mask_prob).
  void push(const env::TransitionRecord& record, Rng& rng);

  /// Uniform sampling with replacement.
  Batch sample_uniform(std::size_t batch_size, Rng& rng) const;

  /// Pre-fills from a dataset in file order. When the dataset exceeds the
  /// capacity only its most recent `capacity` records are kept.
  void init_from_dataset(const env::Dataset& dataset, env::EnvId run_env, Rng& rng);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  int ensemble_size() const { return ensemble_size_; }

  /// i-th stored record, 0 = oldest.
  env::TransitionRecord record(std::size_t i) const;
  std::span<const std::uint8_t> mask(std::size_t i) const;

  /// FNV-1a hash over the raw bytes of one record.
  static std::uint64_t content_hash(const env::TransitionRecord& record);
  bool contains(const env::TransitionRecord& record) const;

 private:
  std::size_t slot(std::size_t i) const;
  void store(const env::TransitionRecord& record);

  std::size_t capacity_;
  int obs_dim_;
  int act_dim_;
  int ensemble_size_;
  double mask_prob_;
  std::vector<float> obs_;
  std::vector<float> actions_;
  std::vector<float> next_obs_;
  std::vector<float> rewards_;
  std::vector<std::uint8_t> done_;
  std::vector<std::uint8_t> truncated_;
  std::vector<std::uint8_t> masks_;
  std::size_t write_cursor_ = 0;
  std::size_t size_ = 0;
};

}  // namespace e2o::replay
