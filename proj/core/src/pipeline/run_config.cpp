#include "e2o/pipeline/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "e2o/errors.hpp"

namespace e2o::pipeline {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_u64(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("expected a non-negative integer");
  return out;
}

int parse_int(std::string_view v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("expected an integer");
  return out;
}

double parse_double(std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number");
  }
  if (used != s.size() || !std::isfinite(out)) throw ConfigError("expected a finite number");
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false");
}

std::vector<int> parse_int_list(std::string_view v) {
  std::vector<int> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_int(trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("expected a comma-separated integer list");
  return out;
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define E2O_U64(name, member)                                                      \
  Field {                                                                          \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_u64(v); },       \
        [](const RunConfig& c) { return std::to_string(c.member); }                \
  }
#define E2O_INT(name, member)                                                      \
  Field {                                                                          \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_int(v); },       \
        [](const RunConfig& c) { return std::to_string(c.member); }                \
  }
#define E2O_DBL(name, member)                                                      \
  Field {                                                                          \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_double(v); },    \
        [](const RunConfig& c) { return fmt_double(c.member); }                    \
  }
#define E2O_BOOL(name, member)                                                     \
  Field {                                                                          \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_bool(v); },      \
        [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"env", [](RunConfig& c, std::string_view v) { c.env = env::make_spec(env::parse_env_id(v)); },
            [](const RunConfig& c) { return env::to_string(c.env.env_id); }},
      Field{"dataset_path", [](RunConfig& c, std::string_view v) { c.dataset_path = std::string(v); },
            [](const RunConfig& c) { return c.dataset_path; }},
      Field{"dataset_kind", [](RunConfig& c, std::string_view v) { c.dataset_kind = env::parse_dataset_kind(v); },
            [](const RunConfig& c) { return env::to_string(c.dataset_kind); }},
      E2O_U64("dataset_size", dataset_size),
      E2O_U64("dataset_seed", dataset_seed),
      E2O_U64("reference_steps", reference_steps),
      E2O_U64("offline_steps", offline_steps),
      E2O_U64("online_env_steps", online_env_steps),
      E2O_U64("eval_interval", eval_interval),
      E2O_U64("online_eval_interval", online_eval_interval),
      E2O_INT("eval_episodes", eval_episodes),
      E2O_U64("seed", seed),
      E2O_BOOL("use_offline_data_online", use_offline_data_online),
      E2O_DBL("bootstrap_mask_prob", bootstrap_mask_prob),
      Field{"output_dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
            [](const RunConfig& c) { return c.output_dir; }},
      Field{"hidden_sizes", [](RunConfig& c, std::string_view v) { c.agent.hidden_sizes = parse_int_list(v); },
            [](const RunConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.agent.hidden_sizes.size(); ++i) {
                if (i) out += ',';
                out += std::to_string(c.agent.hidden_sizes[i]);
              }
              return out;
            }},
      E2O_INT("ensemble_size", agent.ensemble_size),
      E2O_DBL("gamma", agent.gamma),
      E2O_DBL("tau", agent.tau),
      E2O_DBL("policy_lr", agent.policy_lr),
      E2O_DBL("critic_lr", agent.critic_lr),
      E2O_DBL("alpha_lr", agent.alpha_lr),
      E2O_INT("batch_size", agent.batch_size),
      Field{"target_entropy",
            [](RunConfig& c, std::string_view v) {
              if (v == "auto") {
                c.agent.target_entropy.reset();
              } else {
                c.agent.target_entropy = parse_double(v);
              }
            },
            [](const RunConfig& c) {
              return c.agent.target_entropy ? fmt_double(*c.agent.target_entropy) : std::string("auto");
            }},
      E2O_DBL("initial_alpha", agent.initial_alpha),
      E2O_DBL("cql_alpha", agent.cql_alpha),
      E2O_INT("cql_num_sampled_actions", agent.cql_num_sampled_actions),
      Field{"target_strategy",
            [](RunConfig& c, std::string_view v) { c.agent.target_strategy = agent::parse_target_strategy(v); },
            [](const RunConfig& c) { return agent::to_string(c.agent.target_strategy); }},
      E2O_DBL("ucb_lambda", agent.ucb_lambda),
      E2O_INT("ucb_num_candidates", agent.ucb_num_candidates),
      E2O_DBL("oac_delta", agent.oac_delta),
      E2O_INT("updates_per_env_step", agent.updates_per_env_step),
      E2O_DBL("max_grad_norm", agent.max_grad_norm),
      E2O_DBL("online_cql_alpha", online.cql_alpha),
      Field{"online_target_strategy",
            [](RunConfig& c, std::string_view v) { c.online.target_strategy = agent::parse_target_strategy(v); },
            [](const RunConfig& c) { return agent::to_string(c.online.target_strategy); }},
      Field{"online_exploration",
            [](RunConfig& c, std::string_view v) { c.online.exploration = agent::parse_exploration(v); },
            [](const RunConfig& c) { return agent::to_string(c.online.exploration); }},
      E2O_DBL("online_sunrise_temperature", online.sunrise_temperature),
      E2O_DBL("online_initial_alpha", online.initial_alpha),
      E2O_DBL("online_policy_lr", online.policy_lr),
      E2O_DBL("online_critic_lr", online.critic_lr),
      E2O_U64("online_update_after", online.update_after),
  };
  return table;
}

#undef E2O_U64
#undef E2O_INT
#undef E2O_DBL
#undef E2O_BOOL

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

agent::AgentConfig RunConfig::offline_agent_config() const {
  agent::AgentConfig a = agent;
  a.obs_dim = env.obs_dim;
  a.act_dim = env.act_dim;
  a.exploration = agent::Exploration::None;
  a.sunrise_temperature = 0.0;
  return a;
}

agent::AgentConfig RunConfig::online_agent_config() const {
  agent::AgentConfig a = offline_agent_config();
  a.cql_alpha = online.cql_alpha;
  a.target_strategy = online.target_strategy;
  a.exploration = online.exploration;
  a.sunrise_temperature = online.sunrise_temperature;
  if (online.initial_alpha > 0.0) a.initial_alpha = online.initial_alpha;
  if (online.policy_lr > 0.0) a.policy_lr = online.policy_lr;
  if (online.critic_lr > 0.0) a.critic_lr = online.critic_lr;
  return a;
}

double RunConfig::resolved_mask_prob(agent::Phase phase) const {
  if (bootstrap_mask_prob > 0.0) return bootstrap_mask_prob;
  return phase == agent::Phase::online && online.exploration == agent::Exploration::BootstrappedHeads ? 0.8 : 1.0;
}

void RunConfig::validate() const {
  offline_agent_config().validate();
  online_agent_config().validate();
  if (eval_interval == 0) throw ConfigError("eval_interval must be positive");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be at least 1");
  if (dataset_path.empty() && dataset_size == 0 && dataset_kind != env::DatasetKind::medium_replay) {
    throw ConfigError("dataset_size must be positive when the dataset is generated");
  }
  if (!(bootstrap_mask_prob >= 0.0 && bootstrap_mask_prob <= 1.0)) {
    throw ConfigError("bootstrap_mask_prob must lie in [0, 1]");
  }
  if (online.initial_alpha < 0.0 || online.policy_lr < 0.0 || online.critic_lr < 0.0) {
    throw ConfigError("online overrides must be non-negative");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  const Field& f = find_field(key);
  try {
    f.set(config, value);
  } catch (const Error& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.emplace(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + std::string(key) + "' repeated");
    }
    try {
      set_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

}  // namespace e2o::pipeline
