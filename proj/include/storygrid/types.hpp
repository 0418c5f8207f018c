#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storygrid {

inline constexpr int kBoardSize = 8;
inline constexpr int kMaxChannels = 2;

struct CellCoord {
  int col = 0;
  int row = 0;

  friend bool operator==(const CellCoord&, const CellCoord&) = default;
  friend auto operator<=>(const CellCoord&, const CellCoord&) = default;
};

constexpr bool is_valid(CellCoord c) {
  return c.col >= 0 && c.col < kBoardSize && c.row >= 0 && c.row < kBoardSize;
}

// Axis-aligned block of whole cells. `origin` is the top-left cell.
struct Rect {
  CellCoord origin;
  int width = 1;
  int height = 1;

  constexpr int left() const { return origin.col; }
  constexpr int right() const { return origin.col + width - 1; }
  constexpr int top() const { return origin.row; }
  constexpr int bottom() const { return origin.row + height - 1; }

  constexpr bool contains(CellCoord c) const {
    return c.col >= left() && c.col <= right() && c.row >= top() && c.row <= bottom();
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

constexpr bool is_valid(const Rect& r) {
  return is_valid(r.origin) && r.width >= 1 && r.width <= kBoardSize && r.height >= 1 &&
         r.height <= kBoardSize && r.origin.col + r.width <= kBoardSize &&
         r.origin.row + r.height <= kBoardSize;
}

inline constexpr Rect kFullBoard{{0, 0}, kBoardSize, kBoardSize};

using ObjectId = std::string;

enum class AvKind { audio, video };

struct AvComponent {
  AvKind kind = AvKind::audio;
  std::string media_ref;

  friend bool operator==(const AvComponent&, const AvComponent&) = default;
};

// Static binding of one poster element: its image face plus 0-2 AV channels.
struct ObjectSpec {
  ObjectId id;
  std::string image_ref;
  std::vector<AvComponent> av_channels;

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

// Every object declared by the poster, on board or not, in declaration order.
struct Catalog {
  std::vector<ObjectSpec> objects;

  const ObjectSpec* find(std::string_view id) const;

  friend bool operator==(const Catalog&, const Catalog&) = default;
};

struct MediaObject {
  ObjectId id;
  std::string image_ref;
  std::vector<AvComponent> av_channels;
  Rect rect;
  // Pre-zoom rect; present iff the object is zoomed to the full board.
  std::optional<Rect> zoom_saved;
  // 1-based channel index currently playing.
  std::optional<int> playing;

  friend bool operator==(const MediaObject&, const MediaObject&) = default;
};

enum class Edge { left, right, top, bottom };

enum class TokenKind { Mover, Resizer, Player1, Player2, Stopper, Undoer, Zoomer, Eraser };

inline constexpr TokenKind kAllTokens[] = {
    TokenKind::Mover,   TokenKind::Resizer, TokenKind::Player1, TokenKind::Player2,
    TokenKind::Stopper, TokenKind::Undoer,  TokenKind::Zoomer,  TokenKind::Eraser,
};

struct PendingGesture {
  enum class Kind { move_awaiting_target, resize_awaiting_target };

  Kind kind = Kind::move_awaiting_target;
  ObjectId object_id;
  // Move only: offset of the first placement from the object's origin.
  CellCoord anchor;
  // Resize only: edges the first placement lies on, in priority order.
  std::vector<Edge> candidate_edges;

  friend bool operator==(const PendingGesture&, const PendingGesture&) = default;
};

enum class UndoKind { move, resize, erase };

struct UndoRecord {
  UndoKind kind = UndoKind::move;
  ObjectId object_id;
  MediaObject prior_object;
  std::vector<ObjectId> prior_z_order;

  friend bool operator==(const UndoRecord&, const UndoRecord&) = default;
};

struct Board {
  std::string poster_id;
  std::map<ObjectId, MediaObject> objects;
  // Back-to-front.
  std::vector<ObjectId> z_order;
  std::vector<UndoRecord> undo_stack;
  std::optional<PendingGesture> pending;
  // Tokens currently resting on the surface. Display only; no semantics.
  std::map<TokenKind, CellCoord> presence;
  std::shared_ptr<const Catalog> catalog = std::make_shared<const Catalog>();

  const MediaObject* find(std::string_view id) const;
  MediaObject* find(std::string_view id);

  friend bool operator==(const Board& a, const Board& b);
};

enum class SignalCode {
  EmptyUndo,
  NotOnObject,
  NotOnBorder,
  NoSuchChannel,
  AlreadyPlaying,
  NotPlaying,
  DestinationOutOfBounds,
  InvalidResizeTarget,
  GestureCancelled,
  OpCompleted,
};

struct Signal {
  SignalCode code = SignalCode::OpCompleted;
  std::string detail;

  friend bool operator==(const Signal&, const Signal&) = default;
};

enum class PlaybackAction { start, stop };

struct PlaybackCommand {
  ObjectId object_id;
  int channel = 1;
  PlaybackAction action = PlaybackAction::start;
  std::string media_ref;

  friend bool operator==(const PlaybackCommand&, const PlaybackCommand&) = default;
};

// Side outputs of one operation, in emission order per kind.
struct Outcome {
  std::vector<Signal> signals;
  std::vector<PlaybackCommand> commands;

  void append(Outcome other);
};

std::string_view to_string(AvKind kind);
std::string_view to_string(Edge edge);
std::string_view to_string(TokenKind kind);
std::string_view to_string(SignalCode code);
std::string_view to_string(PlaybackAction action);
std::string_view to_string(UndoKind kind);

std::optional<AvKind> av_kind_from_string(std::string_view s);
std::optional<Edge> edge_from_string(std::string_view s);
std::optional<TokenKind> token_from_string(std::string_view s);
std::optional<SignalCode> signal_from_string(std::string_view s);

}  // namespace storygrid
