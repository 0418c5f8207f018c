#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "storygrid/gesture.hpp"
#include "storygrid/persist.hpp"
#include "storygrid/types.hpp"

namespace storygrid::devlog {

// One JSON-lines record: {"ts_ms":..,"token":..,"phase":..,"col":..,"row":..}
using LogRecord = gesture::TokenEvent;

inline constexpr double kDefaultBreakGapSeconds = 300.0;

// Blank lines are skipped. Throws SyntaxError, SchemaError, InvalidCell or
// NonMonotonicTimestamp; messages carry the 1-based line number.
std::vector<LogRecord> parse_log(std::string_view text);
std::string serialize_record(const LogRecord& record);
std::string serialize_log(std::span<const LogRecord> records);

struct TokenUsage {
  int count = 0;
  int percent = 0;

  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct UsageSummary {
  int total_ops = 0;
  // Always holds all eight token kinds.
  std::map<TokenKind, TokenUsage> per_token;
  double active_seconds = 0.0;
  // active_seconds / total_ops; absent with fewer than two operations.
  std::optional<double> mean_interval_s;

  friend bool operator==(const UsageSummary&, const UsageSummary&) = default;
};

// `ops` must be time-ordered. Gaps between consecutive operations of at least
// `break_gap_s` are excluded from the active time.
UsageSummary summarize(std::span<const gesture::CompletedOp> ops,
                       double break_gap_s = kDefaultBreakGapSeconds);

// Rounds to the 0.1 s reporting precision.
double reported_interval(double seconds);

persist::Json to_json(const UsageSummary& summary);
std::string serialize_summary(const UsageSummary& summary);
// Fixed-width table for terminals.
std::string format_summary(const UsageSummary& summary);

struct ReplayOptions {
  std::uint64_t seed = 0;
  // Probability that each placement is lost to an antenna dead spot.
  double dead_spot_prob = 0.0;
  double break_gap_s = kDefaultBreakGapSeconds;
};

struct TranscriptEntry {
  std::size_t record_index = 0;
  std::int64_t ts_ms = 0;
  Signal signal;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

struct ReplayResult {
  Board board;
  std::vector<TranscriptEntry> transcript;
  std::vector<PlaybackCommand> commands;
  std::vector<gesture::CompletedOp> completed;
  std::size_t dropped = 0;
  UsageSummary summary;
};

ReplayResult replay(const persist::PosterManifest& manifest, std::span<const LogRecord> log,
                    const ReplayOptions& options = {});

persist::Json transcript_to_json(std::span<const TranscriptEntry> transcript);

}  // namespace storygrid::devlog
