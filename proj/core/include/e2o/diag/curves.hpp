#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "e2o/pipeline/run_log.hpp"

namespace e2o::diag {

enum class Aggregation : std::uint8_t { per_seed, mean_std };
enum class XAxis : std::uint8_t { env_steps, grad_steps };
enum class CurveMetric : std::uint8_t { normalized_score, avg_q };

std::string to_string(Aggregation a);
std::string to_string(XAxis x);
std::string to_string(CurveMetric m);
Aggregation parse_aggregation(std::string_view s);
XAxis parse_x_axis(std::string_view s);
CurveMetric parse_curve_metric(std::string_view s);

struct LabeledRun {
  std::string label;
  std::string source;
  pipeline::RunLog log;
};

/// Runs sharing a label are seeds of one configuration.
struct CurveBundle {
  std::vector<LabeledRun> runs;
  Aggregation aggregation = Aggregation::mean_std;
  XAxis x_axis = XAxis::env_steps;

  /// Labels default to the file stem when `labels` is empty.
  static CurveBundle load(const std::vector<std::filesystem::path>& paths, const std::vector<std::string>& labels,
                          Aggregation aggregation, XAxis x_axis);
};

struct CurvePoint {
  double x = 0.0;
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct Series {
  std::string label;
  std::vector<CurvePoint> points;
  friend bool operator==(const Series&, const Series&) = default;
};

/// x positions and values for one run. env_steps keeps online rows only;
/// grad_steps keeps every row and offsets online rows by the final offline step.
std::vector<std::pair<double, double>> run_curve(const pipeline::RunLog& log, CurveMetric metric, XAxis x_axis);

/// Series in first-appearance label order. mean_std requires every run of a
/// label to share the same x grid; the population std is reported.
std::vector<Series> build_series(const CurveBundle& bundle, CurveMetric metric);

struct RunSummary {
  double offline_final = 0.0;
  double final_score = 0.0;
  double max_drop = 0.0;
  double auc = 0.0;
  bool has_offline = false;
};

/// Final score is the last row's normalized score. Max drop is the offline
/// final score minus the lowest online score, clipped at 0. AUC integrates
/// the online normalized score over environment steps with the trapezoid
/// rule, starting from (0, offline final) when offline rows exist.
RunSummary summarize_run(const pipeline::RunLog& log);

struct SummaryRow {
  std::string label;
  int runs = 0;
  double final_mean = 0.0;
  double final_std = 0.0;
  double max_drop_mean = 0.0;
  double max_drop_std = 0.0;
  double auc_mean = 0.0;
  double auc_std = 0.0;
};

std::vector<SummaryRow> summarize(const CurveBundle& bundle);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_text(const std::vector<SummaryRow>& rows);

}  // namespace e2o::diag
