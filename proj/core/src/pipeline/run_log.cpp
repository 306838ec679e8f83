#include "e2o/pipeline/run_log.hpp"

#include <cstdio>
#include <sstream>

#include "e2o/errors.hpp"

namespace e2o::pipeline {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = line.find(sep);
    out.push_back(line.substr(0, pos));
    if (pos == std::string_view::npos) break;
    line.remove_prefix(pos + 1);
  }
  return out;
}

double to_double(std::string_view s, int line) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw FormatError("");
    return v;
  } catch (const std::exception&) {
    throw FormatError("run log line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
}

std::uint64_t to_u64(std::string_view s, int line) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const auto v = std::stoull(str, &used);
    if (used != str.size()) throw FormatError("");
    return v;
  } catch (const std::exception&) {
    throw FormatError("run log line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  }
}

bool precedes(const RunLogRow& a, const RunLogRow& b) {
  if (a.phase != b.phase) return a.phase < b.phase;
  return a.step < b.step;
}

}  // namespace

std::string format_row(const RunLogRow& r) {
  std::string out = agent::to_string(r.phase);
  for (const auto& field : {std::to_string(r.step), num(r.eval_return_mean), num(r.eval_return_std),
                            num(r.normalized_score), num(r.avg_q_on_dataset), num(r.q_std_mean), num(r.critic_loss),
                            num(r.actor_loss), num(r.alpha), std::to_string(r.action_clamp_count)}) {
    out += ',';
    out += field;
  }
  return out;
}

void RunLog::append(const RunLogRow& row) {
  if (!rows_.empty() && !precedes(rows_.back(), row)) {
    throw StateError("run log rows must be strictly increasing in (phase, step)");
  }
  rows_.push_back(row);
  if (sink_.is_open()) {
    sink_ << format_row(row) << '\n';
    sink_.flush();
  }
}

void RunLog::attach(const std::filesystem::path& path) {
  sink_ = std::ofstream(path, std::ios::binary | std::ios::trunc);
  if (!sink_) throw StateError("cannot open run log " + path.string());
  sink_ << to_csv();
  sink_.flush();
}

std::vector<RunLogRow> RunLog::rows_for(agent::Phase phase) const {
  std::vector<RunLogRow> out;
  for (const auto& r : rows_) {
    if (r.phase == phase) out.push_back(r);
  }
  return out;
}

std::string RunLog::to_csv() const {
  std::string out(kRunLogHeader);
  out += '\n';
  for (const auto& r : rows_) {
    out += format_row(r);
    out += '\n';
  }
  return out;
}

RunLog RunLog::from_csv(std::string_view text) {
  RunLog log;
  int line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kRunLogHeader) throw FormatError("run log header does not match the expected columns");
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 11) throw FormatError("run log line " + std::to_string(line_no) + ": expected 11 fields");
    RunLogRow r;
    if (f[0] == "offline") {
      r.phase = agent::Phase::offline;
    } else if (f[0] == "online") {
      r.phase = agent::Phase::online;
    } else {
      throw FormatError("run log line " + std::to_string(line_no) + ": unknown phase '" + std::string(f[0]) + "'");
    }
    r.step = to_u64(f[1], line_no);
    r.eval_return_mean = to_double(f[2], line_no);
    r.eval_return_std = to_double(f[3], line_no);
    r.normalized_score = to_double(f[4], line_no);
    r.avg_q_on_dataset = to_double(f[5], line_no);
    r.q_std_mean = to_double(f[6], line_no);
    r.critic_loss = to_double(f[7], line_no);
    r.actor_loss = to_double(f[8], line_no);
    r.alpha = to_double(f[9], line_no);
    r.action_clamp_count = to_u64(f[10], line_no);
    try {
      log.append(r);
    } catch (const StateError&) {
      throw FormatError("run log line " + std::to_string(line_no) + ": rows out of order");
    }
  }
  if (!header_seen) throw FormatError("run log is empty");
  return log;
}

RunLog RunLog::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open run log " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return from_csv(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void RunLog::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StateError("cannot write run log " + path.string());
  out << to_csv();
}

}  // namespace e2o::pipeline
