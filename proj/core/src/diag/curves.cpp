#include "e2o/diag/curves.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "e2o/errors.hpp"

namespace e2o::diag {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  if (v.empty()) return {};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

double metric_value(const pipeline::RunLogRow& r, CurveMetric m) {
  return m == CurveMetric::normalized_score ? r.normalized_score : r.avg_q_on_dataset;
}

}  // namespace

std::string to_string(Aggregation a) { return a == Aggregation::per_seed ? "per_seed" : "mean_std"; }
std::string to_string(XAxis x) { return x == XAxis::env_steps ? "env_steps" : "grad_steps"; }
std::string to_string(CurveMetric m) { return m == CurveMetric::normalized_score ? "normalized_score" : "avg_q"; }

Aggregation parse_aggregation(std::string_view s) {
  if (s == "per_seed") return Aggregation::per_seed;
  if (s == "mean_std") return Aggregation::mean_std;
  throw ConfigError("unknown aggregation '" + std::string(s) + "' (expected per_seed or mean_std)");
}

XAxis parse_x_axis(std::string_view s) {
  if (s == "env_steps") return XAxis::env_steps;
  if (s == "grad_steps") return XAxis::grad_steps;
  throw ConfigError("unknown x axis '" + std::string(s) + "' (expected env_steps or grad_steps)");
}

CurveMetric parse_curve_metric(std::string_view s) {
  if (s == "normalized_score") return CurveMetric::normalized_score;
  if (s == "avg_q") return CurveMetric::avg_q;
  throw ConfigError("unknown metric '" + std::string(s) + "'");
}

CurveBundle CurveBundle::load(const std::vector<std::filesystem::path>& paths, const std::vector<std::string>& labels,
                              Aggregation aggregation, XAxis x_axis) {
  if (paths.empty()) throw ConfigError("at least one run is required");
  if (!labels.empty() && labels.size() != paths.size()) {
    throw ConfigError("got " + std::to_string(labels.size()) + " labels for " + std::to_string(paths.size()) + " runs");
  }
  CurveBundle b;
  b.aggregation = aggregation;
  b.x_axis = x_axis;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    LabeledRun r;
    r.label = labels.empty() ? paths[i].stem().string() : labels[i];
    r.source = paths[i].string();
    r.log = pipeline::RunLog::load(paths[i]);
    b.runs.push_back(std::move(r));
  }
  return b;
}

std::vector<std::pair<double, double>> run_curve(const pipeline::RunLog& log, CurveMetric metric, XAxis x_axis) {
  std::vector<std::pair<double, double>> out;
  double offset = 0.0;
  for (const auto& r : log.rows()) {
    if (r.phase == agent::Phase::offline) {
      offset = static_cast<double>(r.step);
      if (x_axis == XAxis::grad_steps) out.emplace_back(static_cast<double>(r.step), metric_value(r, metric));
    } else {
      const double x = static_cast<double>(r.step) + (x_axis == XAxis::grad_steps ? offset : 0.0);
      out.emplace_back(x, metric_value(r, metric));
    }
  }
  return out;
}

std::vector<Series> build_series(const CurveBundle& bundle, CurveMetric metric) {
  if (bundle.runs.empty()) throw ConfigError("at least one run is required");
  std::vector<Series> out;
  for (const auto& run : bundle.runs) {
    const auto curve = run_curve(run.log, metric, bundle.x_axis);
    if (curve.empty()) throw FormatError("run '" + run.source + "' has no rows on the " + to_string(bundle.x_axis) + " axis");
    for (const auto& [x, y] : curve) {
      if (!std::isfinite(y)) throw FormatError("run '" + run.source + "' is missing metric " + to_string(metric));
    }
  }
  if (bundle.aggregation == Aggregation::per_seed) {
    for (const auto& run : bundle.runs) {
      Series s{run.label, {}};
      for (const auto& [x, y] : run_curve(run.log, metric, bundle.x_axis)) s.points.push_back({x, y, 0.0, 1});
      out.push_back(std::move(s));
    }
    return out;
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<const LabeledRun*>> groups;
  for (const auto& run : bundle.runs) {
    if (!groups.count(run.label)) order.push_back(run.label);
    groups[run.label].push_back(&run);
  }
  for (const auto& label : order) {
    const auto& members = groups[label];
    const auto reference = run_curve(members.front()->log, metric, bundle.x_axis);
    std::vector<std::vector<double>> values(reference.size());
    for (const auto* run : members) {
      const auto curve = run_curve(run->log, metric, bundle.x_axis);
      bool same_grid = curve.size() == reference.size();
      for (std::size_t i = 0; same_grid && i < curve.size(); ++i) same_grid = curve[i].first == reference[i].first;
      if (!same_grid) {
        throw FormatError("run '" + run->source + "' does not share the evaluation steps of label '" + label + "'");
      }
      for (std::size_t i = 0; i < curve.size(); ++i) values[i].push_back(curve[i].second);
    }
    Series s{label, {}};
    for (std::size_t i = 0; i < reference.size(); ++i) {
      const auto ms = mean_std(values[i]);
      s.points.push_back({reference[i].first, ms.mean, ms.std, static_cast<int>(values[i].size())});
    }
    out.push_back(std::move(s));
  }
  return out;
}

RunSummary summarize_run(const pipeline::RunLog& log) {
  if (log.rows().empty()) throw FormatError("run log has no rows");
  RunSummary s;
  s.final_score = log.rows().back().normalized_score;
  const auto offline = log.rows_for(agent::Phase::offline);
  const auto online = log.rows_for(agent::Phase::online);
  s.has_offline = !offline.empty();
  if (s.has_offline) s.offline_final = offline.back().normalized_score;
  if (s.has_offline && !online.empty()) {
    double lowest = online.front().normalized_score;
    for (const auto& r : online) lowest = std::min(lowest, r.normalized_score);
    s.max_drop = std::max(0.0, s.offline_final - lowest);
  }
  if (!online.empty()) {
    double prev_x = s.has_offline ? 0.0 : static_cast<double>(online.front().step);
    double prev_y = s.has_offline ? s.offline_final : online.front().normalized_score;
    for (const auto& r : online) {
      const double x = static_cast<double>(r.step);
      s.auc += 0.5 * (x - prev_x) * (prev_y + r.normalized_score);
      prev_x = x;
      prev_y = r.normalized_score;
    }
  }
  return s;
}

std::vector<SummaryRow> summarize(const CurveBundle& bundle) {
  if (bundle.runs.empty()) throw ConfigError("at least one run is required");
  std::vector<std::string> order;
  std::map<std::string, std::vector<RunSummary>> groups;
  for (const auto& run : bundle.runs) {
    if (!groups.count(run.label)) order.push_back(run.label);
    groups[run.label].push_back(summarize_run(run.log));
  }
  std::vector<SummaryRow> out;
  for (const auto& label : order) {
    const auto& g = groups[label];
    std::vector<double> finals, drops, aucs;
    for (const auto& s : g) {
      finals.push_back(s.final_score);
      drops.push_back(s.max_drop);
      aucs.push_back(s.auc);
    }
    const auto f = mean_std(finals), d = mean_std(drops), a = mean_std(aucs);
    out.push_back({label, static_cast<int>(g.size()), f.mean, f.std, d.mean, d.std, a.mean, a.std});
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "label,runs,final_mean,final_std,max_drop_mean,max_drop_std,auc_mean,auc_std\n";
  for (const auto& r : rows) {
    out += r.label + ',' + std::to_string(r.runs) + ',' + num(r.final_mean) + ',' + num(r.final_std) + ',' +
           num(r.max_drop_mean) + ',' + num(r.max_drop_std) + ',' + num(r.auc_mean) + ',' + num(r.auc_std) + '\n';
  }
  return out;
}

std::string summary_text(const std::vector<SummaryRow>& rows) {
  std::vector<std::vector<std::string>> cells{{"label", "runs", "final score", "max drop", "AUC"}};
  auto pm = [](double m, double s, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, m, s);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    cells.push_back({r.label, std::to_string(r.runs), pm(r.final_mean, r.final_std, "%.1f +/- %.1f"),
                     pm(r.max_drop_mean, r.max_drop_std, "%.1f +/- %.1f"), pm(r.auc_mean, r.auc_std, "%.4g +/- %.3g")});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      const std::size_t pad = width[c] - row[c].size();
      if (c == 0) {
        out += row[c] + std::string(pad, ' ');
      } else {
        out += std::string(pad, ' ') + row[c];
      }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace e2o::diag
