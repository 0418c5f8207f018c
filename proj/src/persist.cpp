#include "storygrid/persist.hpp"

#include <algorithm>
#include <set>

#include "storygrid/error.hpp"
#include "storygrid/playback.hpp"

namespace storygrid::persist {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) schema(std::string("expected object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) schema(std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) schema(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int int_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) schema(std::string("field '") + key + "' must be an integer");
  const auto n = v.get<std::int64_t>();
  if (n < -1024 || n > 1024) schema(std::string("field '") + key + "' out of range");
  return static_cast<int>(n);
}

const Json& array_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) schema(std::string("field '") + key + "' must be an array");
  return v;
}

Json parse_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, e.what());
  }
}

std::string rect_text(const Rect& r) {
  return "((" + std::to_string(r.origin.col) + "," + std::to_string(r.origin.row) + ")," +
         std::to_string(r.width) + "," + std::to_string(r.height) + ")";
}

void check_entry(const LayoutEntry& e) {
  if (!is_valid(e.rect)) schema("invalid rect " + rect_text(e.rect) + " for " + e.object_id);
  if (e.zoomed) {
    if (!is_valid(*e.zoomed)) schema("invalid zoomed rect for " + e.object_id);
    if (!(e.rect == kFullBoard)) schema("zoomed entry " + e.object_id + " must fill the board");
  }
}

void check_layout(const LayoutSnapshot& snapshot) {
  std::set<ObjectId> seen;
  for (const auto& e : snapshot.entries) {
    if (!seen.insert(e.object_id).second) throw Error(ErrorCode::DuplicateId, e.object_id);
    check_entry(e);
  }
}

MediaObject realize(const ObjectSpec& spec, const Rect& rect, std::optional<Rect> zoomed) {
  return MediaObject{spec.id, spec.image_ref, spec.av_channels, rect, zoomed, std::nullopt};
}

Json optional_rect(const std::optional<Rect>& r) { return r ? to_json(*r) : Json(nullptr); }

}  // namespace

Json to_json(const Rect& rect) {
  Json j;
  j["col"] = rect.origin.col;
  j["row"] = rect.origin.row;
  j["w"] = rect.width;
  j["h"] = rect.height;
  return j;
}

Rect rect_from_json(const Json& j) {
  return Rect{{int_field(j, "col"), int_field(j, "row")}, int_field(j, "w"), int_field(j, "h")};
}

Json to_json(const LayoutSnapshot& snapshot) {
  Json j;
  j["name"] = snapshot.name;
  Json entries = Json::array();
  for (const auto& e : snapshot.entries) {
    Json je;
    je["object_id"] = e.object_id;
    je["rect"] = to_json(e.rect);
    if (e.zoomed) je["zoomed"] = to_json(*e.zoomed);
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j;
}

LayoutSnapshot layout_from_json(const Json& j) {
  LayoutSnapshot snapshot;
  snapshot.name = string_field(j, "name");
  for (const auto& je : array_field(j, "entries")) {
    LayoutEntry e;
    e.object_id = string_field(je, "object_id");
    e.rect = rect_from_json(field(je, "rect"));
    if (auto it = je.find("zoomed"); it != je.end() && !it->is_null()) e.zoomed = rect_from_json(*it);
    snapshot.entries.push_back(std::move(e));
  }
  check_layout(snapshot);
  return snapshot;
}

Json to_json(const PosterManifest& manifest) {
  Json j;
  j["poster_id"] = manifest.poster_id;
  j["title"] = manifest.title;
  std::vector<const ObjectSpec*> sorted;
  for (const auto& spec : manifest.objects) sorted.push_back(&spec);
  std::sort(sorted.begin(), sorted.end(),
            [](const ObjectSpec* a, const ObjectSpec* b) { return a->id < b->id; });
  Json objects = Json::array();
  for (const ObjectSpec* spec : sorted) {
    Json jo;
    jo["id"] = spec->id;
    jo["image_ref"] = spec->image_ref;
    Json channels = Json::array();
    for (const auto& av : spec->av_channels) {
      channels.push_back(Json{{"kind", to_string(av.kind)}, {"media_ref", av.media_ref}});
    }
    jo["av_channels"] = std::move(channels);
    objects.push_back(std::move(jo));
  }
  j["objects"] = std::move(objects);
  if (manifest.initial_layout) j["initial_layout"] = to_json(*manifest.initial_layout);
  return j;
}

PosterManifest manifest_from_json(const Json& j) {
  PosterManifest m;
  m.poster_id = string_field(j, "poster_id");
  if (j.contains("title")) m.title = string_field(j, "title");
  std::set<ObjectId> ids;
  for (const auto& jo : array_field(j, "objects")) {
    ObjectSpec spec;
    spec.id = string_field(jo, "id");
    if (!ids.insert(spec.id).second) throw Error(ErrorCode::DuplicateId, spec.id);
    spec.image_ref = string_field(jo, "image_ref");
    if (jo.contains("av_channels")) {
      const Json& channels = array_field(jo, "av_channels");
      if (channels.size() > static_cast<std::size_t>(kMaxChannels)) {
        throw Error(ErrorCode::TooManyChannels,
                    spec.id + " declares " + std::to_string(channels.size()) + " channels");
      }
      for (const auto& jc : channels) {
        auto kind = av_kind_from_string(string_field(jc, "kind"));
        if (!kind) schema("channel kind must be audio or video on " + spec.id);
        spec.av_channels.push_back({*kind, string_field(jc, "media_ref")});
      }
    }
    m.objects.push_back(std::move(spec));
  }
  std::sort(m.objects.begin(), m.objects.end(),
            [](const ObjectSpec& a, const ObjectSpec& b) { return a.id < b.id; });
  if (auto it = j.find("initial_layout"); it != j.end() && !it->is_null()) {
    m.initial_layout = layout_from_json(*it);
    for (const auto& e : m.initial_layout->entries) {
      if (!ids.contains(e.object_id)) throw Error(ErrorCode::DanglingLayoutRef, e.object_id);
    }
  }
  return m;
}

PosterManifest parse_manifest(std::string_view text) { return manifest_from_json(parse_text(text)); }

LayoutSnapshot parse_layout(std::string_view text) { return layout_from_json(parse_text(text)); }

std::string serialize_manifest(const PosterManifest& manifest) {
  return to_json(manifest).dump(2) + "\n";
}

std::string serialize_layout(const LayoutSnapshot& snapshot) {
  return to_json(snapshot).dump(2) + "\n";
}

Json to_json(const Board& board) {
  Json j;
  j["poster_id"] = board.poster_id;
  Json objects = Json::array();
  for (const auto& [id, obj] : board.objects) {
    Json jo;
    jo["id"] = id;
    jo["image_ref"] = obj.image_ref;
    Json channels = Json::array();
    for (const auto& av : obj.av_channels) {
      channels.push_back(Json{{"kind", to_string(av.kind)}, {"media_ref", av.media_ref}});
    }
    jo["av_channels"] = std::move(channels);
    jo["rect"] = to_json(obj.rect);
    jo["zoom_saved"] = optional_rect(obj.zoom_saved);
    jo["playing"] = obj.playing ? Json(*obj.playing) : Json(nullptr);
    objects.push_back(std::move(jo));
  }
  j["objects"] = std::move(objects);
  j["z_order"] = board.z_order;
  j["off_board"] = off_board(board);
  Json undo_stack = Json::array();
  for (const auto& rec : board.undo_stack) {
    undo_stack.push_back(Json{{"kind", to_string(rec.kind)}, {"object_id", rec.object_id}});
  }
  j["undo_stack"] = std::move(undo_stack);
  if (board.pending) {
    const auto& p = *board.pending;
    Json jp;
    if (p.kind == PendingGesture::Kind::move_awaiting_target) {
      jp["kind"] = "move_awaiting_target";
      jp["object_id"] = p.object_id;
      jp["anchor"] = Json{{"col", p.anchor.col}, {"row", p.anchor.row}};
    } else {
      jp["kind"] = "resize_awaiting_target";
      jp["object_id"] = p.object_id;
      Json edges = Json::array();
      for (Edge e : p.candidate_edges) edges.push_back(to_string(e));
      jp["candidate_edges"] = std::move(edges);
    }
    j["pending"] = std::move(jp);
  } else {
    j["pending"] = nullptr;
  }
  Json presence = Json::array();
  for (const auto& [token, cell] : board.presence) {
    presence.push_back(Json{{"token", to_string(token)}, {"col", cell.col}, {"row", cell.row}});
  }
  j["presence"] = std::move(presence);
  return j;
}

std::string serialize_board(const Board& board) { return to_json(board).dump(2) + "\n"; }

Board load_poster(const PosterManifest& manifest) {
  Board board;
  board.poster_id = manifest.poster_id;
  auto catalog = std::make_shared<Catalog>();
  catalog->objects = manifest.objects;
  board.catalog = catalog;

  if (manifest.initial_layout) {
    for (const auto& e : manifest.initial_layout->entries) {
      const ObjectSpec* spec = catalog->find(e.object_id);
      if (spec == nullptr) throw Error(ErrorCode::DanglingLayoutRef, e.object_id);
      check_entry(e);
      board.objects.emplace(e.object_id, realize(*spec, e.rect, e.zoomed));
      board.z_order.push_back(e.object_id);
    }
    return board;
  }

  const std::size_t capacity = static_cast<std::size_t>(kBoardSize * kBoardSize);
  for (std::size_t i = 0; i < manifest.objects.size() && i < capacity; ++i) {
    const ObjectSpec& spec = manifest.objects[i];
    const int n = static_cast<int>(i);
    board.objects.emplace(spec.id, realize(spec, Rect{{n % kBoardSize, n / kBoardSize}, 1, 1}, {}));
    board.z_order.push_back(spec.id);
  }
  return board;
}

std::vector<ObjectId> off_board(const Board& board) {
  std::vector<ObjectId> ids;
  if (!board.catalog) return ids;
  for (const auto& spec : board.catalog->objects) {
    if (board.find(spec.id) == nullptr) ids.push_back(spec.id);
  }
  return ids;
}

LayoutSnapshot save_layout(const Board& board, std::string name) {
  LayoutSnapshot snapshot{std::move(name), {}};
  for (const auto& id : board.z_order) {
    const MediaObject& obj = *board.find(id);
    snapshot.entries.push_back({id, obj.rect, obj.zoom_saved});
  }
  return snapshot;
}

Outcome restore_layout(Board& board, const LayoutSnapshot& snapshot) {
  std::set<ObjectId> seen;
  for (const auto& e : snapshot.entries) {
    if (!board.catalog || board.catalog->find(e.object_id) == nullptr) {
      throw Error(ErrorCode::UnknownObjectInSnapshot, e.object_id);
    }
    if (!seen.insert(e.object_id).second) throw Error(ErrorCode::DuplicateId, e.object_id);
    check_entry(e);
  }

  Outcome out = playback::stop_all(board);
  board.objects.clear();
  board.z_order.clear();
  for (const auto& e : snapshot.entries) {
    board.objects.emplace(e.object_id, realize(*board.catalog->find(e.object_id), e.rect, e.zoomed));
    board.z_order.push_back(e.object_id);
  }
  board.undo_stack.clear();
  board.pending.reset();
  return out;
}

}  // namespace storygrid::persist
