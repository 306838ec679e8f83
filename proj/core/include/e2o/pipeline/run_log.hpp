#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "e2o/agent/config.hpp"

namespace e2o::pipeline {

struct RunLogRow {
  agent::Phase phase = agent::Phase::offline;
  /// Gradient steps offline, environment steps online.
  std::uint64_t step = 0;
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  double normalized_score = 0.0;
  double avg_q_on_dataset = 0.0;
  double q_std_mean = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  std::uint64_t action_clamp_count = 0;
  friend bool operator==(const RunLogRow&, const RunLogRow&) = default;
};

inline constexpr std::string_view kRunLogHeader =
    "phase,step,eval_return_mean,eval_return_std,normalized_score,avg_q_on_dataset,q_std_mean,critic_loss,"
    "actor_loss,alpha,action_clamp_count";

/// Append-only learning curve. Rows are strictly increasing in (phase, step).
/// When attached to a file every appended row is written and flushed.
class RunLog {
 public:
  RunLog() = default;
  const std::vector<RunLogRow>& rows() const { return rows_; }
  void append(const RunLogRow& row);
  /// Truncates `path`, writes the header and any existing rows.
  void attach(const std::filesystem::path& path);
  std::vector<RunLogRow> rows_for(agent::Phase phase) const;
  std::string to_csv() const;
  static RunLog from_csv(std::string_view text);
  static RunLog load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<RunLogRow> rows_;
  std::ofstream sink_;
};

std::string format_row(const RunLogRow& row);

}  // namespace e2o::pipeline
