#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "e2o/diag/curves.hpp"
#include "e2o/env/dataset.hpp"

namespace e2o::diag {

enum class ChartKind : std::uint8_t { returns, avgq, actdist };
std::string to_string(ChartKind k);
ChartKind parse_chart_kind(std::string_view s);

struct CurveChart {
  ChartKind kind = ChartKind::returns;
  XAxis x_axis = XAxis::env_steps;
  Aggregation aggregation = Aggregation::mean_std;
  std::vector<Series> series;
  friend bool operator==(const CurveChart&, const CurveChart&) = default;
};

struct HistogramSeries {
  std::string label;
  double mean_sq_dist = 0.0;
  std::uint64_t samples = 0;
  std::vector<std::uint64_t> counts;
  friend bool operator==(const HistogramSeries&, const HistogramSeries&) = default;
};

struct HistogramChart {
  std::vector<double> bin_edges;
  std::vector<HistogramSeries> series;
  friend bool operator==(const HistogramChart&, const HistogramChart&) = default;
};

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 500;

/// Companion CSV: a "# chart=... x_axis=... aggregation=..." line, a header
/// row, then label,x,mean,std,count rows with values printed to 9 digits.
std::string curve_csv(const CurveChart& chart);
CurveChart parse_curve_csv(std::string_view text);
/// Line chart, mean +/- 1 std band under mean_std. Each series polyline
/// carries its raw values in data-x / data-y attributes.
std::string render_curve_svg(const CurveChart& chart);

/// "# chart=actdist bin_edges=e0;e1;..." then label,mean_sq_dist,samples,bin,lo,hi,count rows.
std::string histogram_csv(const HistogramChart& chart);
HistogramChart parse_histogram_csv(std::string_view text);
/// Overlaid step histograms of per-bin sample fractions.
std::string render_histogram_svg(const HistogramChart& chart);

struct PlotOutputs {
  std::filesystem::path svg;
  std::filesystem::path csv;
};

/// The CSV path is the SVG path with a .csv extension. The SVG is rendered
/// from the parsed CSV so that re-plotting the CSV reproduces it exactly.
PlotOutputs plot_returns(const CurveBundle& bundle, const std::filesystem::path& out_svg);
PlotOutputs plot_avg_q(const CurveBundle& bundle, const std::filesystem::path& out_svg);

struct CheckpointInput {
  std::string label;
  std::filesystem::path path;
};

inline constexpr std::size_t kActionDistanceSamples = 10000;
inline constexpr const char* kUniformReferenceLabel = "uniform-random";

/// Action-distance histograms of each checkpoint's stochastic policy plus a
/// uniform-random reference, all against the same dataset.
HistogramChart action_distance_chart(const std::vector<CheckpointInput>& checkpoints, const env::Dataset& dataset,
                                     std::size_t sample_size, std::uint64_t seed);
PlotOutputs plot_action_distance(const std::vector<CheckpointInput>& checkpoints, const env::Dataset& dataset,
                                 const std::filesystem::path& out_svg, std::size_t sample_size = kActionDistanceSamples,
                                 std::uint64_t seed = 0);

/// Re-renders an SVG from any companion CSV written by the plot functions.
void replot(const std::filesystem::path& csv, const std::filesystem::path& out_svg);

}  // namespace e2o::diag
