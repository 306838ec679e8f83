#include "e2o/replay/buffer.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "e2o/errors.hpp"

namespace e2o::replay {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim, int ensemble_size, double mask_prob)
    : capacity_(capacity),
      obs_dim_(obs_dim),
      act_dim_(act_dim),
      ensemble_size_(ensemble_size),
      mask_prob_(mask_prob) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  if (obs_dim <= 0 || act_dim <= 0) throw ConfigError("replay dims must be positive");
  if (ensemble_size < 1) throw ConfigError("replay ensemble size must be positive");
  if (!(mask_prob >= 0.0 && mask_prob <= 1.0)) throw ConfigError("mask probability must lie in [0, 1]");
  // Storage grows on demand up to capacity.
}

std::size_t ReplayBuffer::slot(std::size_t i) const {
  if (size_ < capacity_) return i;
  return (write_cursor_ + i) % capacity_;
}

void ReplayBuffer::store(const env::TransitionRecord& record) {
  if (static_cast<int>(record.obs.size()) != obs_dim_ || static_cast<int>(record.next_obs.size()) != obs_dim_ ||
      static_cast<int>(record.action.size()) != act_dim_) {
    throw ShapeError("record dims (obs " + std::to_string(record.obs.size()) + ", act " +
                     std::to_string(record.action.size()) + ") do not match buffer dims (obs " +
                     std::to_string(obs_dim_) + ", act " + std::to_string(act_dim_) + ")");
  }
  const std::size_t s = write_cursor_;
  if (size_ < capacity_) {
    obs_.resize((s + 1) * obs_dim_);
    next_obs_.resize((s + 1) * obs_dim_);
    actions_.resize((s + 1) * act_dim_);
    rewards_.resize(s + 1);
    done_.resize(s + 1);
    truncated_.resize(s + 1);
    masks_.resize((s + 1) * ensemble_size_);
  }
  std::copy(record.obs.begin(), record.obs.end(), obs_.begin() + s * obs_dim_);
  std::copy(record.next_obs.begin(), record.next_obs.end(), next_obs_.begin() + s * obs_dim_);
  std::copy(record.action.begin(), record.action.end(), actions_.begin() + s * act_dim_);
  rewards_[s] = record.reward;
  done_[s] = record.done ? 1 : 0;
  truncated_[s] = record.truncated ? 1 : 0;
}

void ReplayBuffer::push(const env::TransitionRecord& record, Rng& rng) {
  store(record);
  const std::size_t s = write_cursor_;
  std::uint8_t* row = masks_.data() + s * ensemble_size_;
  if (mask_prob_ >= 1.0) {
    std::fill(row, row + ensemble_size_, std::uint8_t{1});
  } else {
    std::bernoulli_distribution coin(mask_prob_);
    for (int k = 0; k < ensemble_size_; ++k) row[k] = coin(rng) ? 1 : 0;
  }
  write_cursor_ = (write_cursor_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

Batch ReplayBuffer::sample_uniform(std::size_t batch_size, Rng& rng) const {
  if (size_ == 0) throw StateError("cannot sample from an empty replay buffer");
  const auto B = static_cast<Eigen::Index>(batch_size);
  Batch b;
  b.obs.resize(obs_dim_, B);
  b.actions.resize(act_dim_, B);
  b.next_obs.resize(obs_dim_, B);
  b.rewards.resize(B);
  b.not_done.resize(B);
  b.masks.resize(ensemble_size_, B);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (Eigen::Index j = 0; j < B; ++j) {
    // With fewer records than capacity the ring has not wrapped, so raw slots are valid.
    const std::size_t s = pick(rng);
    for (int d = 0; d < obs_dim_; ++d) {
      b.obs(d, j) = obs_[s * obs_dim_ + d];
      b.next_obs(d, j) = next_obs_[s * obs_dim_ + d];
    }
    for (int d = 0; d < act_dim_; ++d) b.actions(d, j) = actions_[s * act_dim_ + d];
    b.rewards(j) = rewards_[s];
    b.not_done(j) = done_[s] ? 0.0f : 1.0f;
    for (int k = 0; k < ensemble_size_; ++k) b.masks(k, j) = masks_[s * ensemble_size_ + k];
  }
  return b;
}

void ReplayBuffer::init_from_dataset(const env::Dataset& dataset, env::EnvId run_env, Rng& rng) {
  if (dataset.header.env_id != run_env) {
    throw ConfigError("dataset environment " + env::to_string(dataset.header.env_id) +
                      " does not match run environment " + env::to_string(run_env));
  }
  const std::size_t n = dataset.records.size();
  const std::size_t first = n > capacity_ ? n - capacity_ : 0;
  for (std::size_t i = first; i < n; ++i) push(dataset.records[i], rng);
}

env::TransitionRecord ReplayBuffer::record(std::size_t i) const {
  if (i >= size_) throw StateError("replay index out of range");
  const std::size_t s = slot(i);
  env::TransitionRecord r;
  r.obs.assign(obs_.begin() + s * obs_dim_, obs_.begin() + (s + 1) * obs_dim_);
  r.next_obs.assign(next_obs_.begin() + s * obs_dim_, next_obs_.begin() + (s + 1) * obs_dim_);
  r.action.assign(actions_.begin() + s * act_dim_, actions_.begin() + (s + 1) * act_dim_);
  r.reward = rewards_[s];
  r.done = done_[s] != 0;
  r.truncated = truncated_[s] != 0;
  return r;
}

std::span<const std::uint8_t> ReplayBuffer::mask(std::size_t i) const {
  if (i >= size_) throw StateError("replay index out of range");
  return {masks_.data() + slot(i) * ensemble_size_, static_cast<std::size_t>(ensemble_size_)};
}

std::uint64_t ReplayBuffer::content_hash(const env::TransitionRecord& record) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  for (float v : record.obs) mix(std::bit_cast<std::uint32_t>(v));
  for (float v : record.action) mix(std::bit_cast<std::uint32_t>(v));
  mix(std::bit_cast<std::uint32_t>(record.reward));
  for (float v : record.next_obs) mix(std::bit_cast<std::uint32_t>(v));
  mix(record.done ? 1u : 0u);
  mix(record.truncated ? 1u : 0u);
  return h;
}

bool ReplayBuffer::contains(const env::TransitionRecord& record) const {
  const std::uint64_t target = content_hash(record);
  for (std::size_t i = 0; i < size_; ++i) {
    if (content_hash(this->record(i)) == target) return true;
  }
  return false;
}

}  // namespace e2o::replay
