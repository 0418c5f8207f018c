#include <cmath>

#include "doctest.h"
#include "storygrid/core.hpp"
#include "storygrid/devlog.hpp"
#include "storygrid/error.hpp"
#include "storygrid/persist.hpp"
#include "test_support.hpp"

using namespace storygrid;
using storygrid::testing::fixture;

namespace {

ErrorCode log_error(const std::string& text) {
  try {
    devlog::parse_log(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("log unexpectedly parsed");
  return ErrorCode::SchemaError;
}

// `counts[k]` completed operations of each kind, evenly spaced `step_s` apart.
std::vector<gesture::CompletedOp> ops_with(const std::map<TokenKind, int>& counts, std::int64_t step_ms) {
  std::vector<gesture::CompletedOp> ops;
  std::int64_t t = 0;
  for (const auto& [kind, n] : counts) {
    for (int i = 0; i < n; ++i, t += step_ms) ops.push_back({kind, t});
  }
  return ops;
}

persist::Json expected() { return persist::Json::parse(fixture("macbeth_expected.json")); }

}  // namespace

TEST_CASE("parse_log") {
  SUBCASE("empty input") { CHECK(devlog::parse_log("").empty()); }
  SUBCASE("four records and a blank line") {
    auto log = devlog::parse_log(fixture("four_records.jsonl"));
    REQUIRE(log.size() == 4);
    CHECK(log[0].token == TokenKind::Zoomer);
    CHECK(log[0].phase == gesture::Phase::placed);
    CHECK(log[0].cell == CellCoord{3, 4});
    CHECK(log[3].ts_ms == 2400);
    CHECK(devlog::parse_log(devlog::serialize_log(log)).size() == 4);
    CHECK(devlog::serialize_log(log) == devlog::serialize_log(devlog::parse_log(devlog::serialize_log(log))));
  }
  SUBCASE("errors") {
    CHECK(log_error(fixture("bad_order.jsonl")) == ErrorCode::NonMonotonicTimestamp);
    CHECK(log_error(R"({"ts_ms":1,"token":"Mover","phase":"placed","col":8,"row":0})") == ErrorCode::InvalidCell);
    CHECK(log_error(R"({"ts_ms":1,"token":"Mover","phase":"placed","col":-1,"row":0})") == ErrorCode::InvalidCell);
    CHECK(log_error(R"({"ts_ms":1,"token":"Hammer","phase":"placed","col":0,"row":0})") == ErrorCode::SchemaError);
    CHECK(log_error(R"({"ts_ms":1,"token":"Mover","phase":"hovering","col":0,"row":0})") == ErrorCode::SchemaError);
    CHECK(log_error(R"({"ts_ms":1,"token":"Mover")") == ErrorCode::SyntaxError);
  }
  SUBCASE("line numbers in messages") {
    try {
      devlog::parse_log("{\"ts_ms\":5,\"token\":\"Mover\",\"phase\":\"placed\",\"col\":0,\"row\":0}\n\n"
                        "{\"ts_ms\":4,\"token\":\"Mover\",\"phase\":\"lifted\",\"col\":0,\"row\":0}\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("equal timestamps are fine") {
    CHECK(devlog::parse_log("{\"ts_ms\":5,\"token\":\"Mover\",\"phase\":\"placed\",\"col\":0,\"row\":0}\n"
                            "{\"ts_ms\":5,\"token\":\"Mover\",\"phase\":\"lifted\",\"col\":0,\"row\":0}\n")
              .size() == 2);
  }
}

TEST_CASE("summarize") {
  SUBCASE("percentages of the 314-operation session") {
    const std::map<TokenKind, int> counts{{TokenKind::Mover, 100},  {TokenKind::Resizer, 60},
                                          {TokenKind::Player1, 38}, {TokenKind::Player2, 38},
                                          {TokenKind::Stopper, 19}, {TokenKind::Undoer, 6},
                                          {TokenKind::Zoomer, 34},  {TokenKind::Eraser, 19}};
    auto s = devlog::summarize(ops_with(counts, 1000));
    CHECK(s.total_ops == 314);
    // Oracle: round-half-up of 100*count/total, computed in doubles.
    for (const auto& [kind, n] : counts) {
      CHECK(s.per_token.at(kind).count == n);
      CHECK(s.per_token.at(kind).percent == static_cast<int>(std::floor(100.0 * n / 314 + 0.5)));
    }
    CHECK(s.per_token.at(TokenKind::Eraser).percent == 6);
    CHECK(s.per_token.at(TokenKind::Mover).percent == 32);
    CHECK(s.per_token.at(TokenKind::Player1).percent == 12);
    CHECK(s.per_token.at(TokenKind::Player2).percent == 12);
    CHECK(s.per_token.at(TokenKind::Resizer).percent == 19);
    CHECK(s.per_token.at(TokenKind::Stopper).percent == 6);
    CHECK(s.per_token.at(TokenKind::Undoer).percent == 2);
    CHECK(s.per_token.at(TokenKind::Zoomer).percent == 11);
  }
  SUBCASE("breaks are excluded from active time") {
    // 314 ops spanning 82 minutes with two 10-minute breaks.
    std::vector<gesture::CompletedOp> ops;
    const std::int64_t span = 82 * 60 * 1000, brk = 600 * 1000;
    const std::int64_t normal = (span - 2 * brk) / 311;  // 311 ordinary gaps
    std::int64_t t = 0;
    for (int i = 0; i < 314; ++i) {
      ops.push_back({TokenKind::Mover, t});
      if (i == 100 || i == 200) {
        t += brk;
      } else if (i < 313) {
        t += normal;
      }
    }
    ops.back().ts_ms = span;
    auto s = devlog::summarize(ops);
    CHECK(s.active_seconds == doctest::Approx(3720.0));
    REQUIRE(s.mean_interval_s);
    CHECK(devlog::reported_interval(*s.mean_interval_s) == doctest::Approx(11.8));
    CHECK(devlog::to_json(s)["mean_interval_s"] == 11.8);
  }
  SUBCASE("gap exactly at the threshold counts as a break") {
    std::vector<gesture::CompletedOp> ops{{TokenKind::Mover, 0}, {TokenKind::Mover, 300000},
                                          {TokenKind::Mover, 310000}};
    CHECK(devlog::summarize(ops).active_seconds == doctest::Approx(10.0));
  }
  SUBCASE("single operation") {
    std::vector<gesture::CompletedOp> ops{{TokenKind::Zoomer, 5}};
    auto s = devlog::summarize(ops);
    CHECK(s.total_ops == 1);
    CHECK(s.per_token.at(TokenKind::Zoomer).percent == 100);
    CHECK_FALSE(s.mean_interval_s);
    CHECK(devlog::to_json(s)["mean_interval_s"].is_null());
  }
  SUBCASE("no operations") {
    auto s = devlog::summarize({});
    CHECK(s.total_ops == 0);
    CHECK(s.per_token.size() == 8);
    for (const auto& [kind, u] : s.per_token) CHECK(u.percent == 0);
  }
}

TEST_CASE("replay") {
  const auto manifest = persist::parse_manifest(fixture("macbeth_poster.json"));
  const auto log = devlog::parse_log(fixture("macbeth_session.jsonl"));

  SUBCASE("the recorded session reproduces the reference model") {
    const auto e = expected();
    REQUIRE(log.size() == e["records"].get<std::size_t>());
    auto r = devlog::replay(manifest, log);
    CHECK(r.dropped == 0);
    CHECK(r.summary.total_ops == e["total_ops"].get<int>());
    for (const auto& [name, n] : e["counts"].items()) {
      CHECK(r.summary.per_token.at(*token_from_string(name)).count == n.get<int>());
    }
    REQUIRE(!r.completed.empty());
    CHECK(r.completed.front().ts_ms == e["first_op_ms"].get<std::int64_t>());
    CHECK(r.completed.back().ts_ms == e["last_op_ms"].get<std::int64_t>());

    std::map<std::string, int> signals;
    for (const auto& t : r.transcript) {
      if (t.signal.code != SignalCode::OpCompleted) ++signals[std::string(to_string(t.signal.code))];
    }
    std::map<std::string, int> want;
    for (const auto& [name, n] : e["signals"].items()) want[name] = n.get<int>();
    CHECK(signals == want);

    const auto& fin = e["final"];
    CHECK(r.board.z_order == fin["z_order"].get<std::vector<std::string>>());
    for (const auto& [id, v] : fin["rects"].items()) {
      const Rect want_rect{{v[0].get<int>(), v[1].get<int>()}, v[2].get<int>(), v[3].get<int>()};
      CHECK(r.board.objects.at(id).rect == want_rect);
    }
    for (const auto& [id, o] : r.board.objects) {
      CHECK(o.zoom_saved.has_value() == fin["zoom_saved"].contains(id));
      if (fin["playing"].contains(id)) {
        CHECK(o.playing == fin["playing"][id].get<int>());
      } else {
        CHECK_FALSE(o.playing);
      }
    }
    CHECK(r.board.undo_stack.size() == fin["undo_depth"].get<std::size_t>());
    CHECK(validate(r.board).empty());
    CHECK(r.summary.mean_interval_s);
    CHECK(devlog::reported_interval(*r.summary.mean_interval_s) == doctest::Approx(11.8));
  }
  SUBCASE("deterministic for a seed") {
    devlog::ReplayOptions opt{42, 0.3};
    auto a = devlog::replay(manifest, log, opt);
    auto b = devlog::replay(manifest, log, opt);
    CHECK(a.board == b.board);
    CHECK(a.transcript == b.transcript);
    CHECK(a.commands == b.commands);
    CHECK(a.dropped == b.dropped);
    CHECK(a.summary == b.summary);
    CHECK(a.dropped > 0);
    CHECK(persist::serialize_board(a.board) == persist::serialize_board(b.board));
  }
  SUBCASE("every placement lost leaves the loaded poster") {
    auto r = devlog::replay(manifest, log, {7, 1.0});
    CHECK(r.board == persist::load_poster(manifest));
    CHECK(r.summary.total_ops == 0);
    CHECK(r.transcript.empty());
  }
  SUBCASE("no placement lost matches a plain replay") {
    auto a = devlog::replay(manifest, log, {1, 0.0});
    auto b = devlog::replay(manifest, log, {999, 0.0});
    CHECK(a.board == b.board);
    CHECK(a.dropped == 0);
  }
  SUBCASE("loss rate tracks the probability") {
    std::size_t placements = 0;
    for (const auto& rec : log) placements += rec.phase == gesture::Phase::placed;
    auto r = devlog::replay(manifest, log, {5, 0.25});
    const double rate = static_cast<double>(r.dropped) / static_cast<double>(placements);
    CHECK(rate == doctest::Approx(0.25).epsilon(0.25));
  }
}

TEST_CASE("stats serialization") {
  std::vector<gesture::CompletedOp> ops{{TokenKind::Mover, 0}, {TokenKind::Zoomer, 12340}};
  auto s = devlog::summarize(ops);
  auto j = devlog::to_json(s);
  CHECK(j["total_ops"] == 2);
  CHECK(j["per_token"]["Mover"]["percent"] == 50);
  CHECK(j["per_token"]["Eraser"]["count"] == 0);
  CHECK(j["mean_interval_s"] == 6.2);
  CHECK(devlog::serialize_summary(s).back() == '\n');
  CHECK(devlog::format_summary(s).find("Mover") != std::string::npos);
}
