#include "e2o/diag/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "e2o/agent/action_distance.hpp"
#include "e2o/agent/agent.hpp"
#include "e2o/errors.hpp"
#include "e2o/io/binary.hpp"

namespace e2o::diag {

namespace {

constexpr double kLeft = 70.0;
constexpr double kRight = 780.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 440.0;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string px(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_num(std::string_view s) {
  const std::string str(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    throw FormatError("bad number '" + str + "' in plot CSV");
  }
  if (used != str.size()) throw FormatError("bad number '" + str + "' in plot CSV");
  return v;
}

std::uint64_t parse_count(std::string_view s) {
  const double v = parse_num(s);
  if (v < 0 || v != std::floor(v)) throw FormatError("bad count '" + std::string(s) + "' in plot CSV");
  return static_cast<std::uint64_t>(v);
}

/// key=value pairs of the leading "# ..." line.
std::vector<std::pair<std::string, std::string>> parse_meta(std::string_view line) {
  if (line.substr(0, 2) != "# ") throw FormatError("plot CSV must start with a '# chart=...' line");
  std::vector<std::pair<std::string, std::string>> out;
  for (auto tok : split(line.substr(2), ' ')) {
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) throw FormatError("malformed plot CSV metadata '" + std::string(tok) + "'");
    out.emplace_back(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
  }
  return out;
}

std::string meta_value(const std::vector<std::pair<std::string, std::string>>& meta, const std::string& key) {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw FormatError("plot CSV metadata lacks '" + key + "'");
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

struct Frame {
  Range x;
  Range y;
  double sx(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kRight - kLeft); }
  double sy(double v) const { return kBottom - (v - y.lo) / (y.hi - y.lo) * (kBottom - kTop); }
};

std::string svg_open(const std::string& title) {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + std::to_string(kSvgWidth) + " " +
                    std::to_string(kSvgHeight) + "\" width=\"" + std::to_string(kSvgWidth) + "\" height=\"" +
                    std::to_string(kSvgHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(kSvgWidth) + "\" height=\"" + std::to_string(kSvgHeight) +
         "\" fill=\"white\"/>\n";
  out += "<text x=\"" + px((kLeft + kRight) / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  return out;
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
  std::string out;
  out += "<g class=\"axes\" stroke=\"#333\" fill=\"none\">\n";
  out += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kBottom) + "\" x2=\"" + px(kRight) + "\" y2=\"" + px(kBottom) +
         "\"/>\n";
  out += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kTop) + "\" x2=\"" + px(kLeft) + "\" y2=\"" + px(kBottom) + "\"/>\n";
  out += "</g>\n<g class=\"ticks\" fill=\"#333\">\n";
  constexpr int kTicks = 5;
  char buf[32];
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = f.x.lo + (f.x.hi - f.x.lo) * i / kTicks;
    const double yv = f.y.lo + (f.y.hi - f.y.lo) * i / kTicks;
    std::snprintf(buf, sizeof buf, "%.4g", xv);
    out += "<text x=\"" + px(f.sx(xv)) + "\" y=\"" + px(kBottom + 18) + "\" text-anchor=\"middle\">" + buf + "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", yv);
    out += "<text x=\"" + px(kLeft - 6) + "\" y=\"" + px(f.sy(yv) + 4) + "\" text-anchor=\"end\">" + buf + "</text>\n";
  }
  out += "</g>\n";
  out += "<text x=\"" + px((kLeft + kRight) / 2) + "\" y=\"" + px(kBottom + 42) + "\" text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + px((kTop + kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         px((kTop + kBottom) / 2) + ")\">" + escape(y_label) + "</text>\n";
  return out;
}

std::string legend(const std::vector<std::string>& labels) {
  std::string out = "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = kTop + 8 + 16.0 * static_cast<double>(i);
    out += "<line x1=\"" + px(kRight - 150) + "\" y1=\"" + px(y) + "\" x2=\"" + px(kRight - 130) + "\" y2=\"" + px(y) +
           "\" stroke=\"" + color(i) + "\" stroke-width=\"3\"/>\n";
    out += "<text x=\"" + px(kRight - 124) + "\" y=\"" + px(y + 4) + "\">" + escape(labels[i]) + "</text>\n";
  }
  out += "</g>\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StateError("cannot write " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PlotOutputs emit_curves(CurveChart chart, const std::filesystem::path& out_svg) {
  PlotOutputs out{out_svg, std::filesystem::path(out_svg).replace_extension(".csv")};
  const std::string csv = curve_csv(chart);
  write_text(out.csv, csv);
  write_text(out.svg, render_curve_svg(parse_curve_csv(csv)));
  return out;
}

}  // namespace

std::string to_string(ChartKind k) {
  switch (k) {
    case ChartKind::returns:
      return "returns";
    case ChartKind::avgq:
      return "avgq";
    case ChartKind::actdist:
      return "actdist";
  }
  throw ConfigError("invalid chart kind");
}

ChartKind parse_chart_kind(std::string_view s) {
  if (s == "returns") return ChartKind::returns;
  if (s == "avgq") return ChartKind::avgq;
  if (s == "actdist") return ChartKind::actdist;
  throw ConfigError("unknown chart '" + std::string(s) + "' (expected returns, avgq or actdist)");
}

std::string curve_csv(const CurveChart& chart) {
  std::string out = "# chart=" + to_string(chart.kind) + " x_axis=" + to_string(chart.x_axis) +
                    " aggregation=" + to_string(chart.aggregation) + "\n";
  out += "label,x,mean,std,count\n";
  for (const auto& s : chart.series) {
    if (s.label.find_first_of(",\n") != std::string::npos) throw ConfigError("labels may not contain commas or newlines");
    for (const auto& p : s.points) {
      out += s.label + ',' + num(p.x) + ',' + num(p.mean) + ',' + num(p.std) + ',' + std::to_string(p.count) + '\n';
    }
  }
  return out;
}

CurveChart parse_curve_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2) throw FormatError("plot CSV is truncated");
  const auto meta = parse_meta(lines[0]);
  CurveChart chart;
  chart.kind = parse_chart_kind(meta_value(meta, "chart"));
  if (chart.kind == ChartKind::actdist) throw FormatError("histogram CSV passed where a curve CSV was expected");
  chart.x_axis = parse_x_axis(meta_value(meta, "x_axis"));
  chart.aggregation = parse_aggregation(meta_value(meta, "aggregation"));
  if (lines[1] != "label,x,mean,std,count") throw FormatError("unexpected curve CSV header");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 5) throw FormatError("curve CSV row " + std::to_string(i + 1) + " needs 5 fields");
    // A label change starts a new series; per_seed charts may repeat labels.
    if (chart.series.empty() || chart.series.back().label != f[0] ||
        (chart.aggregation == Aggregation::per_seed && !chart.series.back().points.empty() &&
         parse_num(f[1]) <= chart.series.back().points.back().x)) {
      chart.series.push_back({std::string(f[0]), {}});
    }
    chart.series.back().points.push_back(
        {parse_num(f[1]), parse_num(f[2]), parse_num(f[3]), static_cast<int>(parse_count(f[4]))});
  }
  return chart;
}

std::string render_curve_svg(const CurveChart& chart) {
  const bool band = chart.aggregation == Aggregation::mean_std;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : chart.series) {
    for (const auto& p : s.points) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, band ? p.mean - p.std : p.mean);
      yhi = std::max(yhi, band ? p.mean + p.std : p.mean);
    }
  }
  if (!std::isfinite(xlo)) xlo = xhi = ylo = yhi = 0.0;
  const Frame f{padded(xlo, xhi), padded(ylo, yhi)};
  const bool returns = chart.kind == ChartKind::returns;
  std::string out = svg_open(returns ? "Normalized return" : "Average Q on dataset");
  out += axes(f, chart.x_axis == XAxis::env_steps ? "environment steps" : "gradient steps",
              returns ? "normalized score" : "mean ensemble Q");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    labels.push_back(s.label);
    if (band) {
      std::string pts;
      for (const auto& p : s.points) pts += px(f.sx(p.x)) + ',' + px(f.sy(p.mean + p.std)) + ' ';
      for (auto it = s.points.rbegin(); it != s.points.rend(); ++it) {
        pts += px(f.sx(it->x)) + ',' + px(f.sy(it->mean - it->std)) + ' ';
      }
      if (!pts.empty()) pts.pop_back();
      out += "<polygon class=\"band\" points=\"" + pts + "\" fill=\"" + color(i) +
             "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts, dx, dy;
    for (const auto& p : s.points) {
      if (!pts.empty()) {
        pts += ' ';
        dx += ' ';
        dy += ' ';
      }
      pts += px(f.sx(p.x)) + ',' + px(f.sy(p.mean));
      dx += num(p.x);
      dy += num(p.mean);
    }
    out += "<polyline class=\"series\" data-label=\"" + escape(s.label) + "\" data-x=\"" + dx + "\" data-y=\"" + dy +
           "\" points=\"" + pts + "\" fill=\"none\" stroke=\"" + color(i) + "\" stroke-width=\"2\"/>\n";
  }
  out += legend(labels);
  out += "</svg>\n";
  return out;
}

std::string histogram_csv(const HistogramChart& chart) {
  std::string out = "# chart=actdist bin_edges=";
  for (std::size_t i = 0; i < chart.bin_edges.size(); ++i) {
    if (i) out += ';';
    out += num(chart.bin_edges[i]);
  }
  out += "\nlabel,mean_sq_dist,samples,bin,lo,hi,count\n";
  for (const auto& s : chart.series) {
    if (s.counts.size() + 1 != chart.bin_edges.size()) throw ShapeError("histogram counts do not match the bin edges");
    if (s.label.find_first_of(",\n") != std::string::npos) throw ConfigError("labels may not contain commas or newlines");
    for (std::size_t b = 0; b < s.counts.size(); ++b) {
      out += s.label + ',' + num(s.mean_sq_dist) + ',' + std::to_string(s.samples) + ',' + std::to_string(b) + ',' +
             num(chart.bin_edges[b]) + ',' + num(chart.bin_edges[b + 1]) + ',' + std::to_string(s.counts[b]) + '\n';
    }
  }
  return out;
}

HistogramChart parse_histogram_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2) throw FormatError("histogram CSV is truncated");
  const auto meta = parse_meta(lines[0]);
  if (meta_value(meta, "chart") != "actdist") throw FormatError("not a histogram CSV");
  HistogramChart chart;
  const std::string edges = meta_value(meta, "bin_edges");
  for (auto e : split(edges, ';')) chart.bin_edges.push_back(parse_num(e));
  if (chart.bin_edges.size() < 2) throw FormatError("histogram CSV needs at least two bin edges");
  if (lines[1] != "label,mean_sq_dist,samples,bin,lo,hi,count") throw FormatError("unexpected histogram CSV header");
  const std::size_t bins = chart.bin_edges.size() - 1;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 7) throw FormatError("histogram CSV row " + std::to_string(i + 1) + " needs 7 fields");
    const auto bin = parse_count(f[3]);
    if (bin == 0) chart.series.push_back({std::string(f[0]), parse_num(f[1]), parse_count(f[2]), {}});
    if (chart.series.empty() || chart.series.back().counts.size() != bin || bin >= bins) {
      throw FormatError("histogram CSV row " + std::to_string(i + 1) + " is out of bin order");
    }
    chart.series.back().counts.push_back(parse_count(f[6]));
  }
  for (const auto& s : chart.series) {
    if (s.counts.size() != bins) throw FormatError("histogram series '" + s.label + "' is missing bins");
  }
  return chart;
}

std::string render_histogram_svg(const HistogramChart& chart) {
  double ymax = 0.0;
  for (const auto& s : chart.series) {
    for (auto c : s.counts) ymax = std::max(ymax, s.samples ? static_cast<double>(c) / s.samples : 0.0);
  }
  const Frame f{{chart.bin_edges.front(), chart.bin_edges.back()}, {0.0, ymax > 0.0 ? ymax * 1.05 : 1.0}};
  std::string out = svg_open("Squared action distance to dataset actions");
  out += axes(f, "squared distance", "fraction of samples");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    labels.push_back(s.label + " (mean " + [&] {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", s.mean_sq_dist);
      return std::string(buf);
    }() + ")");
    std::string pts = px(f.sx(chart.bin_edges.front())) + ',' + px(f.sy(0.0));
    std::string dy;
    for (std::size_t b = 0; b < s.counts.size(); ++b) {
      const double frac = s.samples ? static_cast<double>(s.counts[b]) / s.samples : 0.0;
      pts += ' ' + px(f.sx(chart.bin_edges[b])) + ',' + px(f.sy(frac));
      pts += ' ' + px(f.sx(chart.bin_edges[b + 1])) + ',' + px(f.sy(frac));
      if (b) dy += ' ';
      dy += std::to_string(s.counts[b]);
    }
    pts += ' ' + px(f.sx(chart.bin_edges.back())) + ',' + px(f.sy(0.0));
    out += "<polyline class=\"histogram\" data-label=\"" + escape(s.label) + "\" data-counts=\"" + dy +
           "\" points=\"" + pts + "\" fill=\"" + color(i) + "\" fill-opacity=\"0.15\" stroke=\"" + color(i) +
           "\" stroke-width=\"2\"/>\n";
  }
  out += legend(labels);
  out += "</svg>\n";
  return out;
}

PlotOutputs plot_returns(const CurveBundle& bundle, const std::filesystem::path& out_svg) {
  return emit_curves({ChartKind::returns, bundle.x_axis, bundle.aggregation,
                      build_series(bundle, CurveMetric::normalized_score)},
                     out_svg);
}

PlotOutputs plot_avg_q(const CurveBundle& bundle, const std::filesystem::path& out_svg) {
  return emit_curves({ChartKind::avgq, bundle.x_axis, bundle.aggregation, build_series(bundle, CurveMetric::avg_q)},
                     out_svg);
}

HistogramChart action_distance_chart(const std::vector<CheckpointInput>& checkpoints, const env::Dataset& dataset,
                                     std::size_t sample_size, std::uint64_t seed) {
  if (dataset.records.empty()) throw StateError("action distance needs a non-empty dataset");
  const int obs_dim = static_cast<int>(dataset.records.front().obs.size());
  const int act_dim = static_cast<int>(dataset.records.front().action.size());
  HistogramChart chart;
  chart.bin_edges = agent::action_distance_bin_edges(act_dim);
  auto add = [&](const std::string& label, const agent::ActionSource& source, std::uint64_t stream) {
    Rng rng(derive_seed(seed, stream));
    const auto r = agent::action_distance(source, dataset, sample_size, rng);
    chart.series.push_back({label, r.mean_sq_dist, r.samples, r.counts});
  };
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const auto contents = agent::parse_checkpoint(io::read_file(checkpoints[i].path));
    if (contents.obs_dim != obs_dim || contents.act_dim != act_dim) {
      throw ShapeError("checkpoint " + checkpoints[i].path.string() + " has dims " + std::to_string(contents.obs_dim) +
                       "/" + std::to_string(contents.act_dim) + " but the dataset has " + std::to_string(obs_dim) +
                       "/" + std::to_string(act_dim));
    }
    add(checkpoints[i].label, agent::policy_action_source(agent::SquashedGaussianPolicy(contents.policy)), i);
  }
  add(kUniformReferenceLabel, agent::uniform_action_source(act_dim), checkpoints.size());
  return chart;
}

PlotOutputs plot_action_distance(const std::vector<CheckpointInput>& checkpoints, const env::Dataset& dataset,
                                 const std::filesystem::path& out_svg, std::size_t sample_size, std::uint64_t seed) {
  PlotOutputs out{out_svg, std::filesystem::path(out_svg).replace_extension(".csv")};
  const std::string csv = histogram_csv(action_distance_chart(checkpoints, dataset, sample_size, seed));
  write_text(out.csv, csv);
  write_text(out.svg, render_histogram_svg(parse_histogram_csv(csv)));
  return out;
}

void replot(const std::filesystem::path& csv, const std::filesystem::path& out_svg) {
  const std::string text = read_text(csv);
  const auto first = lines_of(text);
  if (first.empty()) throw FormatError(csv.string() + " is empty");
  if (meta_value(parse_meta(first.front()), "chart") == "actdist") {
    write_text(out_svg, render_histogram_svg(parse_histogram_csv(text)));
  } else {
    write_text(out_svg, render_curve_svg(parse_curve_csv(text)));
  }
}

}  // namespace e2o::diag
