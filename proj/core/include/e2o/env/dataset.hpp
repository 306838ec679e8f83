#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "e2o/env/envs.hpp"

namespace e2o::env {

/// One environment step. `done` marks a genuine terminal; time-limit ends set `truncated`.
struct TransitionRecord {
  std::vector<float> obs;
  std::vector<float> action;
  float reward = 0.0f;
  std::vector<float> next_obs;
  bool done = false;
  bool truncated = false;

  friend bool operator==(const TransitionRecord&, const TransitionRecord&) = default;
};

enum class DatasetKind : std::uint8_t { medium = 0, medium_replay = 1, medium_expert = 2 };

std::string to_string(DatasetKind kind);
/// Accepts both "medium-expert" and "medium_expert" spellings.
DatasetKind parse_dataset_kind(std::string_view name);

struct DatasetHeader {
  EnvId env_id = EnvId::pendulum;
  DatasetKind kind = DatasetKind::medium;
  std::uint64_t record_count = 0;
  double random_ref_score = 0.0;
  double expert_ref_score = 0.0;
  std::uint64_t generator_seed = 0;

  friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

/// Offline dataset ("E2OD" file).
///
/// Layout, little-endian: magic "E2OD", u32 version, then the header
/// (u8 env_id, u8 kind, u64 record_count, f64 random_ref_score,
/// f64 expert_ref_score, u64 generator_seed) and record_count records of
/// f32 obs[obs_dim], f32 action[act_dim], f32 reward, f32 next_obs[obs_dim],
/// u8 done, u8 truncated.
struct Dataset {
  DatasetHeader header;
  std::vector<TransitionRecord> records;

  std::vector<std::uint8_t> to_bytes() const;
  static Dataset from_bytes(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static Dataset load(const std::filesystem::path& path);

  double mean_reward() const;

  /// Checks header/record consistency and the action-range invariant.
  void validate() const;
};

/// 100 * (raw - random_ref) / (expert_ref - random_ref).
double normalized_score(double raw_return, const DatasetHeader& header);

}  // namespace e2o::env
