// Python bindings. Boards and results cross the boundary as plain dicts built
// from the same JSON the service sends, so Python sees one schema.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "storygrid/core.hpp"
#include "storygrid/devlog.hpp"
#include "storygrid/error.hpp"
#include "storygrid/gesture.hpp"
#include "storygrid/persist.hpp"
#include "storygrid/playback.hpp"

namespace py = pybind11;
using namespace storygrid;
using persist::Json;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json outcome_json(const Outcome& out) {
  Json j;
  j["signals"] = Json::array();
  for (const auto& s : out.signals) j["signals"].push_back({{"code", to_string(s.code)}, {"detail", s.detail}});
  j["commands"] = Json::array();
  for (const auto& c : out.commands) {
    j["commands"].push_back({{"object_id", c.object_id},
                             {"channel", c.channel},
                             {"action", to_string(c.action)},
                             {"media_ref", c.media_ref}});
  }
  return j;
}

TokenKind token_arg(const std::string& s) {
  auto t = token_from_string(s);
  if (!t) throw py::value_error("unknown token '" + s + "'");
  return *t;
}

class PyBoard {
 public:
  explicit PyBoard(const persist::PosterManifest& m) : board_(persist::load_poster(m)) {}

  py::object consume(const std::string& token, const std::string& phase, int col, int row, std::int64_t ts_ms) {
    auto p = gesture::phase_from_string(phase);
    if (!p) throw py::value_error("unknown phase '" + phase + "'");
    auto r = gesture::consume(board_, {ts_ms, token_arg(token), *p, {col, row}});
    Json j = outcome_json(r.outcome);
    j["completed"] = r.completed ? Json(to_string(r.completed->token)) : Json(nullptr);
    return to_py(j);
  }

  py::object move(const ObjectId& id, int col, int row) { return to_py(outcome_json(move_object(board_, id, {col, row}))); }
  py::object resize(const ObjectId& id, const std::string& edge, int line) {
    auto e = edge_from_string(edge);
    if (!e) throw py::value_error("unknown edge '" + edge + "'");
    return to_py(outcome_json(resize_object(board_, id, *e, line)));
  }
  py::object zoom(const ObjectId& id) { return to_py(outcome_json(zoom_toggle(board_, id))); }
  py::object erase(const ObjectId& id) { return to_py(outcome_json(erase_object(board_, id))); }
  py::object undo() { return to_py(outcome_json(storygrid::undo(board_))); }
  py::object play(const ObjectId& id, int channel) { return to_py(outcome_json(playback::play(board_, id, channel))); }
  py::object stop(const ObjectId& id) { return to_py(outcome_json(playback::stop(board_, id))); }
  void media_ended(const ObjectId& id) { playback::on_media_ended(board_, id); }

  std::optional<ObjectId> topmost(int col, int row) const { return topmost_at(board_, {col, row}); }
  std::string save_layout(const std::string& name) const {
    return persist::serialize_layout(persist::save_layout(board_, name));
  }
  py::object restore_layout(const std::string& text) {
    return to_py(outcome_json(persist::restore_layout(board_, persist::parse_layout(text))));
  }
  std::vector<std::string> problems() const { return validate(board_); }
  py::object state() const { return to_py(persist::to_json(board_)); }
  std::string to_json_text() const { return persist::serialize_board(board_); }
  bool equals(const PyBoard& other) const { return board_ == other.board_; }

 private:
  Board board_;
};

py::object replay(const persist::PosterManifest& m, const std::string& log_text, std::uint64_t seed,
                  double dead_spot_prob, double break_gap_s) {
  const auto log = devlog::parse_log(log_text);
  const auto r = devlog::replay(m, log, {seed, dead_spot_prob, break_gap_s});
  Json j;
  j["board"] = persist::to_json(r.board);
  j["final_layout"] = persist::to_json(persist::save_layout(r.board, "final"));
  j["stats"] = devlog::to_json(r.summary);
  j["transcript"] = devlog::transcript_to_json(r.transcript);
  j["dropped"] = r.dropped;
  return to_py(j);
}

}  // namespace

PYBIND11_MODULE(storygrid, m) {
  m.doc() = "Tangible poster engine: board model, token gestures, playback and session logs";

  // Messages read "<ErrorCode>: detail".
  py::register_exception<Error>(m, "StoryGridError", PyExc_ValueError);

  m.attr("BOARD_SIZE") = kBoardSize;

  py::class_<persist::PosterManifest>(m, "Poster")
      .def_static("parse", &persist::parse_manifest, py::arg("text"), "Parse and validate poster.json text.")
      .def_property_readonly("poster_id", [](const persist::PosterManifest& p) { return p.poster_id; })
      .def_property_readonly("title", [](const persist::PosterManifest& p) { return p.title; })
      .def_property_readonly("object_ids",
                             [](const persist::PosterManifest& p) {
                               std::vector<std::string> ids;
                               for (const auto& o : p.objects) ids.push_back(o.id);
                               return ids;
                             })
      .def("serialize", &persist::serialize_manifest, "Canonical poster.json text.")
      .def("__eq__", [](const persist::PosterManifest& a, const persist::PosterManifest& b) { return a == b; });

  py::class_<PyBoard>(m, "Board")
      .def(py::init<const persist::PosterManifest&>(), py::arg("poster"))
      .def("consume", &PyBoard::consume, py::arg("token"), py::arg("phase"), py::arg("col"), py::arg("row"),
           py::arg("ts_ms") = 0, "Feed one token event through the gesture interpreter.")
      .def("move", &PyBoard::move, py::arg("object_id"), py::arg("col"), py::arg("row"))
      .def("resize", &PyBoard::resize, py::arg("object_id"), py::arg("edge"), py::arg("line"))
      .def("zoom", &PyBoard::zoom, py::arg("object_id"))
      .def("erase", &PyBoard::erase, py::arg("object_id"))
      .def("undo", &PyBoard::undo)
      .def("play", &PyBoard::play, py::arg("object_id"), py::arg("channel"))
      .def("stop", &PyBoard::stop, py::arg("object_id"))
      .def("media_ended", &PyBoard::media_ended, py::arg("object_id"))
      .def("topmost", &PyBoard::topmost, py::arg("col"), py::arg("row"))
      .def("save_layout", &PyBoard::save_layout, py::arg("name"), "Layout snapshot as layout.json text.")
      .def("restore_layout", &PyBoard::restore_layout, py::arg("text"))
      .def("problems", &PyBoard::problems, "Invariant violations; empty when the board is sound.")
      .def("state", &PyBoard::state, "Board as a dict, same shape as the service's state message.")
      .def("to_json", &PyBoard::to_json_text)
      .def("__eq__", &PyBoard::equals);

  m.def("replay", &replay, py::arg("poster"), py::arg("log_text"), py::arg("seed") = 0,
        py::arg("dead_spot_prob") = 0.0, py::arg("break_gap_s") = devlog::kDefaultBreakGapSeconds,
        "Replay a JSON-lines token log; returns board, final_layout, stats, transcript and dropped.");
  m.def(
      "parse_log", [](const std::string& text) { return devlog::serialize_log(devlog::parse_log(text)); },
      py::arg("text"), "Validate a token log; returns it in canonical form.");
}
