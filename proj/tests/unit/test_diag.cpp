#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "e2o/agent/agent.hpp"
#include "e2o/diag/curves.hpp"
#include "e2o/diag/plots.hpp"
#include "e2o/env/reference.hpp"
#include "e2o/env/rollout.hpp"
#include "e2o/errors.hpp"
#include "e2o/io/binary.hpp"
#include "e2o/pipeline/training.hpp"

using namespace e2o;
using namespace e2o::diag;
using e2o::agent::Phase;
using e2o::pipeline::RunLog;
using e2o::pipeline::RunLogRow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("e2o_diag_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunLog make_log(double offline_final, const std::vector<std::pair<std::uint64_t, double>>& online) {
  RunLog log;
  RunLogRow off;
  off.phase = Phase::offline;
  off.step = 1000;
  off.normalized_score = offline_final;
  off.avg_q_on_dataset = -3.0;
  log.append(off);
  for (const auto& [step, score] : online) {
    RunLogRow r;
    r.phase = Phase::online;
    r.step = step;
    r.normalized_score = score;
    r.avg_q_on_dataset = score / 10.0;
    log.append(r);
  }
  return log;
}

std::string make_csv(double offline_final, const std::vector<std::pair<std::uint64_t, double>>& online) {
  return make_log(offline_final, online).to_csv();
}

CurveBundle bundle_of(const std::vector<std::pair<std::string, std::string>>& runs, Aggregation agg,
                      XAxis x = XAxis::env_steps) {
  CurveBundle b;
  b.aggregation = agg;
  b.x_axis = x;
  int i = 0;
  for (const auto& [label, csv] : runs) {
    b.runs.push_back({label, "run" + std::to_string(i++) + ".csv", RunLog::from_csv(csv)});
  }
  return b;
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

std::vector<std::pair<std::vector<double>, std::vector<double>>> svg_series(const std::string& svg) {
  const std::regex re("<polyline class=\"series\"[^>]*data-x=\"([^\"]*)\" data-y=\"([^\"]*)\"");
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back({parse_numbers((*it)[1]), parse_numbers((*it)[2])});
  }
  return out;
}

env::Dataset uniform_dataset(env::EnvId id, std::size_t n) {
  const auto spec = env::make_spec(id);
  env::Dataset d;
  d.records = env::collect_transitions(spec, env::uniform_random_policy(spec.act_dim), n, 3);
  d.header = {.env_id = id, .record_count = d.records.size(), .random_ref_score = -1200.0,
              .expert_ref_score = -150.0};
  return d;
}

}  // namespace

TEST_CASE("enumeration names round-trip") {
  for (auto a : {Aggregation::per_seed, Aggregation::mean_std}) CHECK(parse_aggregation(to_string(a)) == a);
  for (auto x : {XAxis::env_steps, XAxis::grad_steps}) CHECK(parse_x_axis(to_string(x)) == x);
  for (auto m : {CurveMetric::normalized_score, CurveMetric::avg_q}) CHECK(parse_curve_metric(to_string(m)) == m);
  CHECK_THROWS_AS(parse_aggregation("median"), ConfigError);
}

TEST_CASE("run curves select rows per x axis") {
  const auto log = make_log(50.0, {{100, 55.0}, {200, 60.0}});
  const auto env_curve = run_curve(log, CurveMetric::normalized_score, XAxis::env_steps);
  CHECK(env_curve == std::vector<std::pair<double, double>>{{100, 55.0}, {200, 60.0}});
  const auto grad_curve = run_curve(log, CurveMetric::normalized_score, XAxis::grad_steps);
  CHECK(grad_curve == std::vector<std::pair<double, double>>{{1000, 50.0}, {1100, 55.0}, {1200, 60.0}});
  const auto q = run_curve(log, CurveMetric::avg_q, XAxis::grad_steps);
  CHECK(q.front().second == -3.0);
}

TEST_CASE("single run per seed: polyline vertices equal the log rows") {
  const auto log = make_log(40.0, {{250, 41.5}, {500, 47.25}, {750, 52.0}, {1000, 60.125}});
  const auto dir = scratch("single");
  const auto out = plot_returns(bundle_of({{"e2o", log.to_csv()}}, Aggregation::per_seed), dir / "r.svg");
  const auto series = svg_series(slurp(out.svg));
  REQUIRE(series.size() == 1);
  const auto rows = log.rows_for(Phase::online);
  REQUIRE(series[0].first.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(series[0].first[i] == static_cast<double>(rows[i].step));
    CHECK(series[0].second[i] == rows[i].normalized_score);
  }
  CHECK(out.csv == dir / "r.csv");
  CHECK(slurp(out.svg).find("viewBox=\"0 0 800 500\"") != std::string::npos);
}

TEST_CASE("identical seeds give a zero-width band") {
  const auto log = make_log(40.0, {{250, 41.5}, {500, 47.25}});
  std::vector<std::pair<std::string, std::string>> runs;
  for (int i = 0; i < 5; ++i) runs.push_back({"e2o", log.to_csv()});
  const auto bundle = bundle_of(runs, Aggregation::mean_std);
  const auto series = build_series(bundle, CurveMetric::normalized_score);
  REQUIRE(series.size() == 1);
  for (const auto& p : series[0].points) {
    CHECK(p.std == 0.0);
    CHECK(p.count == 5);
  }
  const auto svg = render_curve_svg({ChartKind::returns, XAxis::env_steps, Aggregation::mean_std, series});
  const std::regex band("<polygon class=\"band\" points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, band));
  // Upper and lower edges coincide: the reversed second half repeats the first.
  std::vector<std::string> pts;
  std::istringstream in(m[1].str());
  for (std::string p; in >> p;) pts.push_back(p);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0] == pts[3]);
  CHECK(pts[1] == pts[2]);
}

TEST_CASE("mean and population std across seeds") {
  const auto bundle = bundle_of({{"a", make_csv(0.0, {{10, 1.0}})}, {"a", make_csv(0.0, {{10, 3.0}})},
                                 {"b", make_csv(0.0, {{10, 7.0}})}},
                                Aggregation::mean_std);
  const auto s = build_series(bundle, CurveMetric::normalized_score);
  REQUIRE(s.size() == 2);
  CHECK(s[0].label == "a");
  CHECK(s[0].points[0].mean == 2.0);
  CHECK(s[0].points[0].std == 1.0);
  CHECK(s[1].points[0].mean == 7.0);
}

TEST_CASE("mismatched evaluation grids name the offending run") {
  const auto bundle =
      bundle_of({{"a", make_csv(0.0, {{10, 1.0}, {20, 2.0}})}, {"a", make_csv(0.0, {{10, 1.0}, {30, 2.0}})}},
                Aggregation::mean_std);
  try {
    (void)build_series(bundle, CurveMetric::normalized_score);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("run1.csv") != std::string::npos);
  }
  auto empty = bundle_of({{"a", RunLog{}.to_csv()}}, Aggregation::per_seed);
  CHECK_THROWS_AS(build_series(empty, CurveMetric::normalized_score), FormatError);
}

TEST_CASE("re-plotting the CSV reproduces the SVG byte for byte") {
  const auto dir = scratch("replot");
  const auto bundle = bundle_of({{"e2o", make_csv(40.0, {{250, 41.5}, {500, 47.0}})},
                                 {"e2o", make_csv(40.0, {{250, 35.0}, {500, 52.0}})},
                                 {"naive", make_csv(30.0, {{250, 12.0}, {500, 33.3333}})}},
                                Aggregation::mean_std);
  for (const bool avgq : {false, true}) {
    const auto out = avgq ? plot_avg_q(bundle, dir / "q.svg") : plot_returns(bundle, dir / "r.svg");
    replot(out.csv, dir / "again.svg");
    CHECK(slurp(dir / "again.svg") == slurp(out.svg));
    const auto chart = parse_curve_csv(slurp(out.csv));
    CHECK(curve_csv(chart) == slurp(out.csv));
    CHECK(chart.kind == (avgq ? ChartKind::avgq : ChartKind::returns));
  }
}

TEST_CASE("every plotted value appears in the companion CSV") {
  const auto dir = scratch("verbatim");
  const auto bundle = bundle_of({{"e2o", make_csv(40.0, {{250, 41.123456789}, {500, 47.0}})}}, Aggregation::per_seed);
  const auto out = plot_returns(bundle, dir / "r.svg");
  const auto csv = slurp(out.csv);
  for (const auto& [xs, ys] : svg_series(slurp(out.svg))) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto chart = parse_curve_csv(csv);
      CHECK(chart.series[0].points[i].x == xs[i]);
      CHECK(chart.series[0].points[i].mean == ys[i]);
    }
  }
}

TEST_CASE("summaries") {
  SUBCASE("constant score") {
    const auto s = summarize_run(make_log(50.0, {{100, 50.0}, {200, 50.0}, {300, 50.0}}));
    CHECK(s.max_drop == 0.0);
    CHECK(s.auc == doctest::Approx(50.0 * 300));
    CHECK(s.final_score == 50.0);
  }
  SUBCASE("monotone increase") {
    const auto s = summarize_run(make_log(10.0, {{100, 20.0}, {200, 30.0}}));
    CHECK(s.max_drop == 0.0);
  }
  SUBCASE("dip 80 -> 60 -> 90") {
    const auto s = summarize_run(make_log(80.0, {{100, 60.0}, {200, 90.0}}));
    CHECK(s.max_drop == 20.0);
    CHECK(s.final_score == 90.0);
    CHECK(s.auc == doctest::Approx(0.5 * 100 * (80 + 60) + 0.5 * 100 * (60 + 90)));
  }
  SUBCASE("table over labels") {
    const auto bundle = bundle_of({{"a", make_csv(80.0, {{100, 60.0}, {200, 90.0}})},
                                   {"a", make_csv(80.0, {{100, 70.0}, {200, 70.0}})}},
                                  Aggregation::mean_std);
    const auto rows = summarize(bundle);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].runs == 2);
    CHECK(rows[0].final_mean == 80.0);
    CHECK(rows[0].final_std == 10.0);
    CHECK(rows[0].max_drop_mean == 15.0);
    const auto csv = summary_csv(rows);
    CHECK(csv.find("label") == 0);
    CHECK(csv.find("\na,2,") != std::string::npos);
    CHECK(summary_text(rows).find("a ") != std::string::npos);
  }
}

TEST_CASE("bundles load run logs from disk with default labels") {
  const auto dir = scratch("bundle");
  make_log(1.0, {{10, 2.0}}).save(dir / "alpha.csv");
  make_log(1.0, {{10, 4.0}}).save(dir / "beta.csv");
  const auto b = CurveBundle::load({dir / "alpha.csv", dir / "beta.csv"}, {}, Aggregation::per_seed,
                                   XAxis::env_steps);
  REQUIRE(b.runs.size() == 2);
  CHECK(b.runs[0].label == "alpha");
  CHECK(b.runs[1].label == "beta");
  CHECK_THROWS(CurveBundle::load({dir / "alpha.csv"}, {"x", "y"}, Aggregation::per_seed, XAxis::env_steps));
  CHECK_THROWS(CurveBundle::load({dir / "nope.csv"}, {}, Aggregation::per_seed, XAxis::env_steps));
}

TEST_CASE("converged single-transition critics read an average Q of one") {
  env::Dataset d;
  const auto spec = env::make_spec(env::EnvId::pendulum);
  for (int i = 0; i < 64; ++i) {
    d.records.push_back({.obs = {1.0f, 0.0f, 0.0f}, .action = {0.25f}, .reward = 1.0f, .next_obs = {1.0f, 0.0f, 0.0f},
                         .done = true});
  }
  d.header = {.env_id = env::EnvId::pendulum, .record_count = 64, .random_ref_score = -1200.0,
              .expert_ref_score = -150.0};
  pipeline::RunConfig c;
  c.agent.hidden_sizes = {16, 16};
  c.agent.ensemble_size = 3;
  c.agent.batch_size = 16;
  c.agent.cql_alpha = 0.0;
  c.agent.critic_lr = 1e-3;
  c.offline_steps = 3000;
  c.eval_interval = 3000;
  c.eval_episodes = 1;
  RunLog log;
  (void)pipeline::train_offline(c, d, log);
  REQUIRE(log.rows().size() == 1);
  CHECK(std::abs(log.rows()[0].avg_q_on_dataset - 1.0) <= 0.05);
}

TEST_CASE("conservative training lowers the average-Q curve") {
  const auto spec = env::make_spec(env::EnvId::pendulum);
  const auto refs = env::train_reference_policies(spec, 8, env::ReferenceTrainingConfig::defaults(spec));
  const auto d = env::generate_dataset(env::DatasetKind::medium, spec, 8, 5000, refs);
  pipeline::RunConfig c;
  c.agent.hidden_sizes = {32, 32};
  c.agent.ensemble_size = 3;
  c.agent.batch_size = 64;
  c.agent.cql_num_sampled_actions = 4;
  c.offline_steps = 3000;
  c.eval_interval = 1000;
  c.eval_episodes = 1;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    c.seed = seed;
    c.agent.cql_alpha = 5.0;
    RunLog cql;
    (void)pipeline::train_offline(c, d, cql);
    c.agent.cql_alpha = 0.0;
    RunLog plain;
    (void)pipeline::train_offline(c, d, plain);
    REQUIRE(cql.rows().size() == plain.rows().size());
    for (std::size_t i = 0; i < cql.rows().size(); ++i) {
      CHECK(cql.rows()[i].avg_q_on_dataset < plain.rows()[i].avg_q_on_dataset);
    }
  }
}

TEST_CASE("action-distance chart with a uniform reference") {
  const auto dir = scratch("actdist");
  const auto d = uniform_dataset(env::EnvId::pendulum, 3000);
  agent::AgentConfig cfg;
  cfg.obs_dim = 3;
  cfg.act_dim = 1;
  cfg.hidden_sizes = {8};
  cfg.ensemble_size = 2;
  const agent::Agent a(cfg, 1);
  io::write_file(dir / "a.e2oc", a.save_checkpoint(env::EnvId::pendulum));
  const std::vector<CheckpointInput> inputs{{"init", dir / "a.e2oc"}};
  const auto chart = action_distance_chart(inputs, d, 20000, 4);
  REQUIRE(chart.series.size() == 2);
  CHECK(chart.series[0].label == "init");
  CHECK(chart.series[1].label == kUniformReferenceLabel);
  CHECK(std::abs(chart.series[1].mean_sq_dist - 2.0 / 3.0) <= 0.05);
  CHECK(chart.bin_edges.front() == 0.0);
  CHECK(chart.bin_edges.back() == 4.0);

  const auto out = plot_action_distance(inputs, d, dir / "h.svg", 5000, 4);
  const auto csv = slurp(out.csv);
  CHECK(csv.rfind("# chart=actdist bin_edges=0;", 0) == 0);
  CHECK(parse_histogram_csv(csv) == parse_histogram_csv(histogram_csv(parse_histogram_csv(csv))));
  replot(out.csv, dir / "again.svg");
  CHECK(slurp(dir / "again.svg") == slurp(out.svg));

  agent::AgentConfig pm = cfg;
  pm.obs_dim = 4;
  pm.act_dim = 2;
  const agent::Agent b(pm, 1);
  io::write_file(dir / "b.e2oc", b.save_checkpoint(env::EnvId::pointmass));
  CHECK_THROWS(action_distance_chart({{"pm", dir / "b.e2oc"}}, d, 100, 1));
}
