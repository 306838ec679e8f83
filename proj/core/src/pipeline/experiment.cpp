#include "e2o/pipeline/experiment.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "e2o/env/reference.hpp"
#include "e2o/io/binary.hpp"
#include "e2o/io/hash.hpp"
#include "json.hpp"

namespace e2o::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json config_json(const RunConfig& config) {
  ordered_json out = ordered_json::object();
  const std::string text = to_text(config);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    const auto eq = line.find(" = ");
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

ordered_json eval_json(const env::EvalResult& ev, const env::DatasetHeader& header) {
  return {{"mean_return", ev.mean_return},
          {"std_return", ev.std_return},
          {"normalized_score", env::normalized_score(ev.mean_return, header)}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StateError("cannot write " + path.string());
  out << text;
}

}  // namespace

env::Dataset generate_run_dataset(const RunConfig& config) {
  auto ref_cfg = env::ReferenceTrainingConfig::defaults(config.env);
  if (config.reference_steps > 0) ref_cfg.total_steps = config.reference_steps;
  const auto refs = env::train_reference_policies(config.env, config.dataset_seed, ref_cfg);
  return env::generate_dataset(config.dataset_kind, config.env, config.dataset_seed, config.dataset_size, refs);
}

env::Dataset prepare_dataset(const RunConfig& config, fs::path& resolved_path) {
  if (!config.dataset_path.empty()) {
    resolved_path = config.dataset_path;
    if (!fs::exists(resolved_path)) throw FormatError("dataset file not found: " + resolved_path.string());
    env::Dataset d = env::Dataset::load(resolved_path);
    if (d.header.env_id != config.env.env_id) {
      throw ConfigError("dataset " + resolved_path.string() + " was recorded on " + env::to_string(d.header.env_id) +
                        " but the run uses " + env::to_string(config.env.env_id));
    }
    return d;
  }
  resolved_path = fs::path(config.output_dir) / artifact::kDataset;
  env::Dataset d = generate_run_dataset(config);
  d.save(resolved_path);
  return d;
}

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();
  ExperimentResult result;
  result.dir = config.output_dir;
  fs::create_directories(result.dir);
  write_text(result.dir / artifact::kConfig, to_text(config));

  ordered_json manifest;
  manifest["created_at"] = utc_timestamp();
  manifest["seed"] = config.seed;
  manifest["config"] = config_json(config);
  manifest["inputs"] = ordered_json::object();
  manifest["outputs"] = ordered_json::object();
  manifest["status"] = "running";

  auto write_manifest = [&] {
    manifest["finished_at"] = utc_timestamp();
    write_text(result.dir / artifact::kManifest, manifest.dump(2) + "\n");
  };
  auto fail = [&](const std::string& stage, const std::string& message) {
    result.ok = false;
    result.failed_stage = stage;
    result.error = message;
    manifest["status"] = "error";
    manifest["error"] = {{"stage", stage}, {"message", message}};
    write_manifest();
    return result;
  };
  auto record_output = [&](const char* name) {
    manifest["outputs"][name] = io::git_blob_id_of_file(result.dir / name);
  };

  env::Dataset dataset;
  try {
    fs::path dataset_path;
    dataset = prepare_dataset(config, dataset_path);
    manifest["inputs"]["dataset"] = {{"path", dataset_path.string()},
                                     {"kind", env::to_string(dataset.header.kind)},
                                     {"records", dataset.header.record_count},
                                     {"git_blob", io::git_blob_id_of_file(dataset_path)}};
  } catch (const std::exception& e) {
    return fail("dataset", e.what());
  }
  manifest["inputs"]["config"] = {{"path", artifact::kConfig},
                                  {"git_blob", io::git_blob_id_of_file(result.dir / artifact::kConfig)}};

  RunLog log;
  log.attach(result.dir / artifact::kRunLog);
  try {
    result.offline = train_offline(config, dataset, log);
    io::write_file(result.dir / artifact::kOfflineCheckpoint, result.offline->checkpoint);
    record_output(artifact::kOfflineCheckpoint);
    manifest["offline_final"] = eval_json(result.offline->final_eval, dataset.header);
  } catch (const TrainingError& e) {
    io::write_file(result.dir / artifact::kLastGoodCheckpoint, e.last_good_checkpoint);
    record_output(artifact::kRunLog);
    return fail("offline", e.what());
  } catch (const std::exception& e) {
    return fail("offline", e.what());
  }

  try {
    result.online = train_online(config, dataset, result.offline->checkpoint, log);
    io::write_file(result.dir / artifact::kOnlineCheckpoint, result.online->checkpoint);
    record_output(artifact::kOnlineCheckpoint);
    manifest["online_handoff"] = eval_json(result.online->handoff_eval, dataset.header);
    manifest["online_final"] = eval_json(result.online->final_eval, dataset.header);
  } catch (const TrainingError& e) {
    io::write_file(result.dir / artifact::kLastGoodCheckpoint, e.last_good_checkpoint);
    record_output(artifact::kRunLog);
    return fail("online", e.what());
  } catch (const std::exception& e) {
    return fail("online", e.what());
  }

  record_output(artifact::kRunLog);
  manifest["status"] = "ok";
  result.ok = true;
  write_manifest();
  return result;
}

std::vector<ExperimentResult> run_sweep(const RunConfig& config, const std::vector<std::uint64_t>& seeds) {
  config.validate();
  RunConfig base = config;
  if (base.dataset_path.empty()) {
    fs::create_directories(base.output_dir);
    fs::path path;
    prepare_dataset(base, path);
    base.dataset_path = path.string();
  }
  std::vector<ExperimentResult> out;
  for (const std::uint64_t seed : seeds) {
    RunConfig c = base;
    c.seed = seed;
    c.output_dir = (fs::path(base.output_dir) / ("seed_" + std::to_string(seed))).string();
    out.push_back(run_experiment(c));
  }
  return out;
}

}  // namespace e2o::pipeline
