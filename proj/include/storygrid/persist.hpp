#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "storygrid/types.hpp"

namespace storygrid::persist {

using Json = nlohmann::ordered_json;

struct LayoutEntry {
  ObjectId object_id;
  Rect rect;
  // Pre-zoom rect when the object is zoomed.
  std::optional<Rect> zoomed;

  friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

// Saved arrangement; entry order is back-to-front z-order.
struct LayoutSnapshot {
  std::string name;
  std::vector<LayoutEntry> entries;

  friend bool operator==(const LayoutSnapshot&, const LayoutSnapshot&) = default;
};

struct PosterManifest {
  std::string poster_id;
  std::string title;
  // Sorted by id; this is also the auto-placement order.
  std::vector<ObjectSpec> objects;
  std::optional<LayoutSnapshot> initial_layout;

  friend bool operator==(const PosterManifest&, const PosterManifest&) = default;
};

// Throws SyntaxError, SchemaError, DuplicateId, TooManyChannels or
// DanglingLayoutRef.
PosterManifest parse_manifest(std::string_view text);
// Throws SyntaxError, SchemaError or DuplicateId.
LayoutSnapshot parse_layout(std::string_view text);

// Canonical UTF-8 JSON, two-space indented, trailing newline.
std::string serialize_manifest(const PosterManifest& manifest);
std::string serialize_layout(const LayoutSnapshot& snapshot);

Json to_json(const Rect& rect);
Json to_json(const PosterManifest& manifest);
Json to_json(const LayoutSnapshot& snapshot);
// Full board state as broadcast to clients.
Json to_json(const Board& board);
std::string serialize_board(const Board& board);

Rect rect_from_json(const Json& j);
LayoutSnapshot layout_from_json(const Json& j);
PosterManifest manifest_from_json(const Json& j);

// Builds the starting board. Without an initial layout, objects are placed
// 1x1 in row-major order from (0,0); objects past the 64th stay off board.
Board load_poster(const PosterManifest& manifest);

// Catalog ids not currently on the board, in catalog order.
std::vector<ObjectId> off_board(const Board& board);

LayoutSnapshot save_layout(const Board& board, std::string name);

// Replaces the on-board set, rects, zoom states and z-order with the
// snapshot's. Stops all playback, clears undo and any pending gesture.
// Throws UnknownObjectInSnapshot (board untouched).
Outcome restore_layout(Board& board, const LayoutSnapshot& snapshot);

}  // namespace storygrid::persist
