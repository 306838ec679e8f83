#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "e2o/agent/agent.hpp"
#include "e2o/diag/curves.hpp"
#include "e2o/diag/plots.hpp"
#include "e2o/env/reference.hpp"
#include "e2o/io/binary.hpp"
#include "e2o/pipeline/experiment.hpp"

namespace fs = std::filesystem;
using namespace e2o;

namespace {

pipeline::RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  pipeline::RunConfig config = path.empty() ? pipeline::RunConfig{} : pipeline::load_run_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    pipeline::set_config_value(config, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  config.validate();
  return config;
}

void print_eval(const char* what, const env::EvalResult& ev, const env::DatasetHeader* header) {
  std::printf("%s: return %.2f +/- %.2f", what, ev.mean_return, ev.std_return);
  if (header) std::printf("  normalized %.2f", env::normalized_score(ev.mean_return, *header));
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline-to-online RL lab: dataset generation, CQL-N pre-training, SAC-N fine-tuning, diagnostics"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Train behaviour policies and write an offline dataset");
  std::string gen_env = "pendulum", gen_kind = "medium", gen_out;
  std::uint64_t gen_size = 50000, gen_seed = 0, gen_ref_steps = 0;
  gen->add_option("--env", gen_env, "pendulum or pointmass")->capture_default_str();
  gen->add_option("--kind", gen_kind, "medium, medium-replay or medium-expert")->capture_default_str();
  gen->add_option("--size", gen_size, "Records (ignored for medium-replay)")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--reference-steps", gen_ref_steps, "SAC steps for the behaviour run (0: env default)");
  gen->add_option("--out", gen_out, "Output .e2od file")->required();

  // run
  auto* run = app.add_subcommand("run", "Dataset, offline pre-training and online fine-tuning in one go");
  std::string run_cfg;
  std::vector<std::string> run_set;
  std::vector<std::uint64_t> run_seeds;
  run->add_option("--config", run_cfg, "Run config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", run_set, "Override a config key (key=value), repeatable");
  run->add_option("--seeds", run_seeds, "Sweep over these seeds (one subdirectory each)")->delimiter(',');

  // train-offline
  auto* toff = app.add_subcommand("train-offline", "CQL-N pre-training from a dataset");
  std::string toff_cfg, toff_out, toff_log;
  std::vector<std::string> toff_set;
  toff->add_option("--config", toff_cfg, "Run config file")->check(CLI::ExistingFile);
  toff->add_option("--set", toff_set, "Override a config key (key=value), repeatable");
  toff->add_option("--out", toff_out, "Output checkpoint")->required();
  toff->add_option("--log", toff_log, "Run log CSV (default: <out>.csv)");

  // train-online
  auto* ton = app.add_subcommand("train-online", "Online fine-tuning from an offline checkpoint");
  std::string ton_cfg, ton_from, ton_out, ton_log;
  std::vector<std::string> ton_set;
  ton->add_option("--config", ton_cfg, "Run config file")->check(CLI::ExistingFile);
  ton->add_option("--set", ton_set, "Override a config key (key=value), repeatable");
  ton->add_option("--from", ton_from, "Offline checkpoint")->required()->check(CLI::ExistingFile);
  ton->add_option("--out", ton_out, "Output checkpoint")->required();
  ton->add_option("--log", ton_log, "Run log CSV (default: <out>.csv)");

  // eval
  auto* ev = app.add_subcommand("eval", "Deterministic-policy evaluation of a checkpoint");
  std::string ev_ckpt, ev_dataset;
  int ev_episodes = 10;
  std::uint64_t ev_seed = 0;
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--episodes", ev_episodes, "Episodes")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--seed", ev_seed, "First episode seed")->capture_default_str();
  ev->add_option("--dataset", ev_dataset, "Dataset whose reference scores normalize the result")
      ->check(CLI::ExistingFile);

  // plot
  auto* plot = app.add_subcommand("plot", "Emit SVG figures with companion CSVs");
  std::string plot_kind, plot_out, plot_agg = "mean_std", plot_x = "env_steps", plot_dataset, plot_csv;
  std::vector<std::string> plot_runs, plot_labels;
  std::size_t plot_samples = diag::kActionDistanceSamples;
  std::uint64_t plot_seed = 0;
  plot->add_option("kind", plot_kind, "returns, avgq, actdist or replot")
      ->required()
      ->check(CLI::IsMember({"returns", "avgq", "actdist", "replot"}));
  plot->add_option("--runs", plot_runs, "Run logs (returns/avgq) or checkpoints (actdist)");
  plot->add_option("--labels", plot_labels, "One label per run; equal labels are aggregated");
  plot->add_option("--out", plot_out, "Output SVG")->required();
  plot->add_option("--aggregation", plot_agg, "per_seed or mean_std")->capture_default_str();
  plot->add_option("--x-axis", plot_x, "env_steps or grad_steps")->capture_default_str();
  plot->add_option("--dataset", plot_dataset, "Dataset for actdist")->check(CLI::ExistingFile);
  plot->add_option("--samples", plot_samples, "Dataset pairs per actdist histogram")->capture_default_str();
  plot->add_option("--seed", plot_seed, "Sampling seed for actdist")->capture_default_str();
  plot->add_option("--csv", plot_csv, "Companion CSV to re-render (replot)")->check(CLI::ExistingFile);

  // summarize
  auto* sum = app.add_subcommand("summarize", "Final score, max drop and AUC per label");
  std::vector<std::string> sum_runs, sum_labels;
  std::string sum_out;
  sum->add_option("--runs", sum_runs, "Run logs")->required();
  sum->add_option("--labels", sum_labels, "One label per run; equal labels are aggregated");
  sum->add_option("--out", sum_out, "CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto spec = env::make_spec(env::parse_env_id(gen_env));
      auto ref_cfg = env::ReferenceTrainingConfig::defaults(spec);
      if (gen_ref_steps > 0) ref_cfg.total_steps = gen_ref_steps;
      const auto refs = env::train_reference_policies(spec, gen_seed, ref_cfg);
      const auto d = env::generate_dataset(env::parse_dataset_kind(gen_kind), spec, gen_seed, gen_size, refs);
      d.save(gen_out);
      std::printf("wrote %s: %llu records, random ref %.2f, expert ref %.2f (medium step %llu, expert step %llu)\n",
                  gen_out.c_str(), static_cast<unsigned long long>(d.header.record_count), d.header.random_ref_score,
                  d.header.expert_ref_score, static_cast<unsigned long long>(refs.medium_step),
                  static_cast<unsigned long long>(refs.expert_step));
      return 0;
    }
    if (*run) {
      const auto config = load_config(run_cfg, run_set);
      std::vector<pipeline::ExperimentResult> results;
      if (run_seeds.empty()) {
        results.push_back(pipeline::run_experiment(config));
      } else {
        results = pipeline::run_sweep(config, run_seeds);
      }
      int failures = 0;
      for (const auto& r : results) {
        if (r.ok) {
          std::printf("%s: ok (offline final %.2f, online final %.2f)\n", r.dir.string().c_str(),
                      r.offline->final_eval.mean_return, r.online->final_eval.mean_return);
        } else {
          ++failures;
          std::fprintf(stderr, "%s: %s stage failed: %s\n", r.dir.string().c_str(), r.failed_stage.c_str(),
                       r.error.c_str());
        }
      }
      return failures == 0 ? 0 : 1;
    }
    if (*toff) {
      const auto config = load_config(toff_cfg, toff_set);
      fs::path dataset_path;
      const auto dataset = pipeline::prepare_dataset(config, dataset_path);
      pipeline::RunLog log;
      log.attach(toff_log.empty() ? fs::path(toff_out).replace_extension(".csv") : fs::path(toff_log));
      const auto r = pipeline::train_offline(config, dataset, log);
      io::write_file(toff_out, r.checkpoint);
      print_eval("offline final", r.final_eval, &dataset.header);
      return 0;
    }
    if (*ton) {
      const auto config = load_config(ton_cfg, ton_set);
      fs::path dataset_path;
      const auto dataset = pipeline::prepare_dataset(config, dataset_path);
      pipeline::RunLog log;
      log.attach(ton_log.empty() ? fs::path(ton_out).replace_extension(".csv") : fs::path(ton_log));
      const auto r = pipeline::train_online(config, dataset, io::read_file(ton_from), log);
      io::write_file(ton_out, r.checkpoint);
      print_eval("handoff", r.handoff_eval, &dataset.header);
      print_eval("online final", r.final_eval, &dataset.header);
      return 0;
    }
    if (*ev) {
      const auto contents = agent::parse_checkpoint(io::read_file(ev_ckpt));
      const auto spec = env::make_spec(contents.env_id);
      const auto result =
          pipeline::evaluate(agent::SquashedGaussianPolicy(contents.policy), spec, ev_episodes, ev_seed);
      std::optional<env::Dataset> dataset;
      if (!ev_dataset.empty()) dataset = env::Dataset::load(ev_dataset);
      std::printf("%s (%s, %s phase, %d episodes)\n", ev_ckpt.c_str(), env::to_string(contents.env_id).c_str(),
                  agent::to_string(contents.phase).c_str(), ev_episodes);
      print_eval("eval", result, dataset ? &dataset->header : nullptr);
      return 0;
    }
    if (*plot) {
      if (plot_kind == "replot") {
        if (plot_csv.empty()) throw ConfigError("replot needs --csv");
        diag::replot(plot_csv, plot_out);
        std::printf("wrote %s\n", plot_out.c_str());
        return 0;
      }
      if (plot_runs.empty()) throw ConfigError("--runs is required");
      if (!plot_labels.empty() && plot_labels.size() != plot_runs.size()) {
        throw ConfigError("--labels must give one label per run");
      }
      diag::PlotOutputs out;
      if (plot_kind == "actdist") {
        if (plot_dataset.empty()) throw ConfigError("actdist needs --dataset");
        std::vector<diag::CheckpointInput> ckpts;
        for (std::size_t i = 0; i < plot_runs.size(); ++i) {
          ckpts.push_back({plot_labels.empty() ? fs::path(plot_runs[i]).stem().string() : plot_labels[i], plot_runs[i]});
        }
        out = diag::plot_action_distance(ckpts, env::Dataset::load(plot_dataset), plot_out, plot_samples, plot_seed);
      } else {
        std::vector<fs::path> paths(plot_runs.begin(), plot_runs.end());
        const auto bundle = diag::CurveBundle::load(paths, plot_labels, diag::parse_aggregation(plot_agg),
                                                    diag::parse_x_axis(plot_x));
        out = plot_kind == "returns" ? diag::plot_returns(bundle, plot_out) : diag::plot_avg_q(bundle, plot_out);
      }
      std::printf("wrote %s and %s\n", out.svg.string().c_str(), out.csv.string().c_str());
      return 0;
    }
    if (*sum) {
      std::vector<fs::path> paths(sum_runs.begin(), sum_runs.end());
      const auto bundle =
          diag::CurveBundle::load(paths, sum_labels, diag::Aggregation::mean_std, diag::XAxis::env_steps);
      const auto rows = diag::summarize(bundle);
      std::cout << diag::summary_text(rows);
      if (!sum_out.empty()) {
        std::ofstream out(sum_out, std::ios::binary | std::ios::trunc);
        if (!out) throw StateError("cannot write " + sum_out);
        out << diag::summary_csv(rows);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "e2o: %s\n", e.what());
    return 1;
  }
  return 0;
}
