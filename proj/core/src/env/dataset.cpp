#include "e2o/env/dataset.hpp"

#include "e2o/errors.hpp"
#include "e2o/io/binary.hpp"

namespace e2o::env {

namespace {
constexpr std::uint32_t kDatasetVersion = 1;
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::medium:
      return "medium";
    case DatasetKind::medium_replay:
      return "medium-replay";
    case DatasetKind::medium_expert:
      return "medium-expert";
  }
  throw ConfigError("unknown dataset kind");
}

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "medium") return DatasetKind::medium;
  if (name == "medium-replay" || name == "medium_replay") return DatasetKind::medium_replay;
  if (name == "medium-expert" || name == "medium_expert") return DatasetKind::medium_expert;
  throw ConfigError("unknown dataset kind '" + std::string(name) + "'");
}

void Dataset::validate() const {
  if (!(header.expert_ref_score > header.random_ref_score)) {
    throw FormatError("dataset header: expert reference score must exceed the random reference score");
  }
  if (header.record_count != records.size()) {
    throw FormatError("dataset header claims " + std::to_string(header.record_count) + " records, payload has " +
                      std::to_string(records.size()));
  }
  const EnvSpec spec = make_spec(header.env_id);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (static_cast<int>(r.obs.size()) != spec.obs_dim || static_cast<int>(r.next_obs.size()) != spec.obs_dim ||
        static_cast<int>(r.action.size()) != spec.act_dim) {
      throw ShapeError("record " + std::to_string(i) + " does not match the environment dimensions");
    }
    for (float a : r.action) {
      if (!(a >= -1.0f && a <= 1.0f)) throw FormatError("record " + std::to_string(i) + " has an action outside [-1,1]");
    }
    if (r.done && r.truncated) throw FormatError("record " + std::to_string(i) + " is both done and truncated");
  }
}

std::vector<std::uint8_t> Dataset::to_bytes() const {
  validate();
  io::BinaryWriter w;
  w.magic("E2OD");
  w.u32(kDatasetVersion);
  w.u8(static_cast<std::uint8_t>(header.env_id));
  w.u8(static_cast<std::uint8_t>(header.kind));
  w.u64(header.record_count);
  w.f64(header.random_ref_score);
  w.f64(header.expert_ref_score);
  w.u64(header.generator_seed);
  for (const auto& r : records) {
    w.f32_array(r.obs);
    w.f32_array(r.action);
    w.f32(r.reward);
    w.f32_array(r.next_obs);
    w.u8(r.done ? 1 : 0);
    w.u8(r.truncated ? 1 : 0);
  }
  return std::move(w).bytes();
}

Dataset Dataset::from_bytes(std::span<const std::uint8_t> bytes) {
  io::BinaryReader r(bytes);
  r.expect_magic("E2OD");
  if (const auto v = r.u32(); v != kDatasetVersion) throw FormatError("unsupported E2OD version " + std::to_string(v));
  Dataset d;
  const std::uint8_t env_code = r.u8();
  if (env_code > static_cast<std::uint8_t>(EnvId::pointmass)) throw FormatError("unknown env id in dataset");
  d.header.env_id = static_cast<EnvId>(env_code);
  const std::uint8_t kind_code = r.u8();
  if (kind_code > static_cast<std::uint8_t>(DatasetKind::medium_expert)) throw FormatError("unknown dataset kind");
  d.header.kind = static_cast<DatasetKind>(kind_code);
  d.header.record_count = r.u64();
  d.header.random_ref_score = r.f64();
  d.header.expert_ref_score = r.f64();
  d.header.generator_seed = r.u64();

  const EnvSpec spec = make_spec(d.header.env_id);
  const std::size_t record_bytes = 4 * (2 * spec.obs_dim + spec.act_dim + 1) + 2;
  if (d.header.record_count * record_bytes != r.remaining()) {
    throw FormatError("dataset payload size does not match record_count");
  }
  d.records.resize(d.header.record_count);
  for (auto& rec : d.records) {
    rec.obs.resize(spec.obs_dim);
    rec.action.resize(spec.act_dim);
    rec.next_obs.resize(spec.obs_dim);
    r.f32_array(rec.obs);
    r.f32_array(rec.action);
    rec.reward = r.f32();
    r.f32_array(rec.next_obs);
    const std::uint8_t done = r.u8();
    const std::uint8_t trunc = r.u8();
    if (done > 1 || trunc > 1) throw FormatError("boolean field is not 0/1");
    rec.done = done == 1;
    rec.truncated = trunc == 1;
  }
  r.expect_end();
  d.validate();
  return d;
}

void Dataset::save(const std::filesystem::path& path) const { io::write_file(path, to_bytes()); }

Dataset Dataset::load(const std::filesystem::path& path) { return from_bytes(io::read_file(path)); }

double Dataset::mean_reward() const {
  if (records.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : records) s += r.reward;
  return s / static_cast<double>(records.size());
}

double normalized_score(double raw_return, const DatasetHeader& header) {
  const double span = header.expert_ref_score - header.random_ref_score;
  if (!(span > 0.0)) throw ConfigError("normalized_score: expert reference must exceed random reference");
  return 100.0 * (raw_return - header.random_ref_score) / span;
}

}  // namespace e2o::env
