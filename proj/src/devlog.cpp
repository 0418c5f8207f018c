#include "storygrid/devlog.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "storygrid/error.hpp"

namespace storygrid::devlog {

namespace {

using persist::Json;

std::string at_line(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

LogRecord record_from_json(const Json& j, std::size_t line) {
  auto bad = [&](const std::string& what) -> Error {
    return Error(ErrorCode::SchemaError, at_line(line, what));
  };
  if (!j.is_object()) throw bad("record must be an object");
  auto integer = [&](const char* key) -> std::int64_t {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) throw bad(std::string("'") + key + "' must be an integer");
    return it->get<std::int64_t>();
  };
  auto text = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw bad(std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  };

  LogRecord r;
  r.ts_ms = integer("ts_ms");
  auto token = token_from_string(text("token"));
  if (!token) throw bad("unknown token '" + text("token") + "'");
  r.token = *token;
  auto phase = gesture::phase_from_string(text("phase"));
  if (!phase) throw bad("unknown phase '" + text("phase") + "'");
  r.phase = *phase;
  const std::int64_t col = integer("col");
  const std::int64_t row = integer("row");
  if (col < 0 || col >= kBoardSize || row < 0 || row >= kBoardSize) {
    throw Error(ErrorCode::InvalidCell,
                at_line(line, "(" + std::to_string(col) + "," + std::to_string(row) + ")"));
  }
  r.cell = {static_cast<int>(col), static_cast<int>(row)};
  return r;
}

// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<LogRecord> parse_log(std::string_view text) {
  std::vector<LogRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    Json j;
    try {
      j = Json::parse(line.begin(), line.end());
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::SyntaxError, at_line(line_no, e.what()));
    }
    LogRecord r = record_from_json(j, line_no);
    if (!records.empty() && r.ts_ms < records.back().ts_ms) {
      throw Error(ErrorCode::NonMonotonicTimestamp,
                  at_line(line_no, std::to_string(r.ts_ms) + " after " +
                                       std::to_string(records.back().ts_ms)));
    }
    records.push_back(r);
  }
  return records;
}

std::string serialize_record(const LogRecord& r) {
  Json j;
  j["ts_ms"] = r.ts_ms;
  j["token"] = to_string(r.token);
  j["phase"] = gesture::to_string(r.phase);
  j["col"] = r.cell.col;
  j["row"] = r.cell.row;
  return j.dump();
}

std::string serialize_log(std::span<const LogRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

UsageSummary summarize(std::span<const gesture::CompletedOp> ops, double break_gap_s) {
  UsageSummary s;
  for (TokenKind k : kAllTokens) s.per_token[k] = {};
  s.total_ops = static_cast<int>(ops.size());
  if (ops.empty()) return s;

  for (const auto& op : ops) ++s.per_token[op.token].count;
  for (auto& [kind, usage] : s.per_token) {
    // round(100 * count / total), halves away from zero, in exact integers.
    usage.percent = (200 * usage.count + s.total_ops) / (2 * s.total_ops);
  }

  const auto break_gap_ms = static_cast<std::int64_t>(std::llround(break_gap_s * 1000.0));
  std::int64_t breaks_ms = 0;
  for (std::size_t i = 1; i < ops.size(); ++i) {
    const std::int64_t gap = ops[i].ts_ms - ops[i - 1].ts_ms;
    if (gap >= break_gap_ms) breaks_ms += gap;
  }
  const std::int64_t active_ms = (ops.back().ts_ms - ops.front().ts_ms) - breaks_ms;
  s.active_seconds = static_cast<double>(active_ms) / 1000.0;
  if (s.total_ops >= 2) s.mean_interval_s = s.active_seconds / s.total_ops;
  return s;
}

double reported_interval(double seconds) { return std::round(seconds * 10.0) / 10.0; }

persist::Json to_json(const UsageSummary& s) {
  Json j;
  j["total_ops"] = s.total_ops;
  Json per = Json::object();
  for (const auto& [kind, usage] : s.per_token) {
    per[std::string(to_string(kind))] = Json{{"count", usage.count}, {"percent", usage.percent}};
  }
  j["per_token"] = std::move(per);
  j["active_seconds"] = s.active_seconds;
  j["mean_interval_s"] = s.mean_interval_s ? Json(reported_interval(*s.mean_interval_s)) : Json(nullptr);
  return j;
}

std::string serialize_summary(const UsageSummary& s) { return to_json(s).dump(2) + "\n"; }

std::string format_summary(const UsageSummary& s) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "Token" << std::right << std::setw(8) << "Count"
     << std::setw(10) << "Percent" << "\n";
  for (const auto& [kind, usage] : s.per_token) {
    os << std::left << std::setw(10) << to_string(kind) << std::right << std::setw(8)
       << usage.count << std::setw(9) << usage.percent << "%\n";
  }
  os << "total operations: " << s.total_ops << "\n";
  os << "active time: " << std::fixed << std::setprecision(1) << s.active_seconds << " s\n";
  if (s.mean_interval_s) {
    os << "mean interval: " << std::fixed << std::setprecision(1)
       << reported_interval(*s.mean_interval_s) << " s\n";
  } else {
    os << "mean interval: n/a\n";
  }
  return os.str();
}

ReplayResult replay(const persist::PosterManifest& manifest, std::span<const LogRecord> log,
                    const ReplayOptions& options) {
  ReplayResult result;
  result.board = persist::load_poster(manifest);
  std::mt19937_64 rng(options.seed);

  for (std::size_t i = 0; i < log.size(); ++i) {
    const LogRecord& record = log[i];
    if (record.phase == gesture::Phase::placed && unit_interval(rng) < options.dead_spot_prob) {
      ++result.dropped;
      continue;
    }
    gesture::ConsumeResult step = gesture::consume(result.board, record);
    for (auto& sig : step.outcome.signals) {
      result.transcript.push_back({i, record.ts_ms, std::move(sig)});
    }
    for (auto& cmd : step.outcome.commands) result.commands.push_back(std::move(cmd));
    if (step.completed) result.completed.push_back(*step.completed);
  }
  result.summary = summarize(result.completed, options.break_gap_s);
  return result;
}

persist::Json transcript_to_json(std::span<const TranscriptEntry> transcript) {
  Json arr = Json::array();
  for (const auto& t : transcript) {
    arr.push_back(Json{{"record", t.record_index},
                       {"ts_ms", t.ts_ms},
                       {"code", to_string(t.signal.code)},
                       {"detail", t.signal.detail}});
  }
  return arr;
}

}  // namespace storygrid::devlog
