#include "storygrid/core.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "storygrid/error.hpp"

namespace storygrid {

namespace {

MediaObject& require(Board& board, const ObjectId& id) {
  MediaObject* obj = board.find(id);
  if (obj == nullptr) throw Error(ErrorCode::UnknownObject, id);
  return *obj;
}

std::string describe(const Rect& r) {
  std::ostringstream os;
  os << "((" << r.origin.col << "," << r.origin.row << ")," << r.width << "," << r.height << ")";
  return os.str();
}

PlaybackCommand channel_command(const MediaObject& obj, int channel, PlaybackAction action) {
  return PlaybackCommand{obj.id, channel, action,
                         obj.av_channels.at(static_cast<std::size_t>(channel - 1)).media_ref};
}

// Records the undo entry and applies the new geometry. `next` has already
// been validated.
void apply_geometry(Board& board, MediaObject& obj, UndoKind kind, const Rect& next) {
  board.undo_stack.push_back(UndoRecord{kind, obj.id, obj, board.z_order});
  obj.rect = next;
  obj.zoom_saved.reset();
  bring_to_front(board, obj.id);
}

}  // namespace

std::optional<ObjectId> topmost_at(const Board& board, CellCoord cell) {
  for (auto it = board.z_order.rbegin(); it != board.z_order.rend(); ++it) {
    const MediaObject* obj = board.find(*it);
    if (obj != nullptr && obj->rect.contains(cell)) return *it;
  }
  return std::nullopt;
}

void bring_to_front(Board& board, const ObjectId& id) {
  auto it = std::find(board.z_order.begin(), board.z_order.end(), id);
  if (it == board.z_order.end()) return;
  std::rotate(it, it + 1, board.z_order.end());
}

Outcome move_object(Board& board, const ObjectId& id, CellCoord new_origin) {
  MediaObject& obj = require(board, id);
  Rect next = obj.rect;
  next.origin = new_origin;
  if (!is_valid(next)) throw Error(ErrorCode::OutOfBounds, id + " -> " + describe(next));
  if (next == obj.rect) return {};
  apply_geometry(board, obj, UndoKind::move, next);
  return {};
}

int edge_line(const Rect& rect, Edge edge) {
  switch (edge) {
    case Edge::left:
      return rect.left();
    case Edge::right:
      return rect.right();
    case Edge::top:
      return rect.top();
    case Edge::bottom:
      return rect.bottom();
  }
  return 0;
}

std::optional<Rect> resized_rect(const Rect& rect, Edge edge, int target_line) {
  if (target_line < 0 || target_line >= kBoardSize) return std::nullopt;
  Rect next = rect;
  switch (edge) {
    case Edge::left:
      next.origin.col = target_line;
      next.width = rect.right() - target_line + 1;
      break;
    case Edge::right:
      next.width = target_line - rect.left() + 1;
      break;
    case Edge::top:
      next.origin.row = target_line;
      next.height = rect.bottom() - target_line + 1;
      break;
    case Edge::bottom:
      next.height = target_line - rect.top() + 1;
      break;
  }
  if (!is_valid(next)) return std::nullopt;
  return next;
}

Outcome resize_object(Board& board, const ObjectId& id, Edge edge, int target_line) {
  MediaObject& obj = require(board, id);
  auto next = resized_rect(obj.rect, edge, target_line);
  if (!next) {
    throw Error(ErrorCode::InvalidResize, id + " " + std::string(to_string(edge)) + " -> " +
                                              std::to_string(target_line));
  }
  if (*next == obj.rect) return {};
  apply_geometry(board, obj, UndoKind::resize, *next);
  return {};
}

Outcome zoom_toggle(Board& board, const ObjectId& id) {
  MediaObject& obj = require(board, id);
  if (obj.zoom_saved) {
    obj.rect = *obj.zoom_saved;
    obj.zoom_saved.reset();
  } else {
    obj.zoom_saved = obj.rect;
    obj.rect = kFullBoard;
  }
  bring_to_front(board, id);
  return {};
}

Outcome erase_object(Board& board, const ObjectId& id_ref) {
  const ObjectId id = id_ref;  // id_ref may live in z_order
  MediaObject& obj = require(board, id);
  Outcome out;
  board.undo_stack.push_back(UndoRecord{UndoKind::erase, id, obj, board.z_order});
  if (obj.playing) {
    out.commands.push_back(channel_command(obj, *obj.playing, PlaybackAction::stop));
  }
  if (board.pending && board.pending->object_id == id) board.pending.reset();
  board.z_order.erase(std::remove(board.z_order.begin(), board.z_order.end(), id),
                      board.z_order.end());
  board.objects.erase(id);
  return out;
}

Outcome undo(Board& board) {
  Outcome out;
  if (board.undo_stack.empty()) {
    out.signals.push_back({SignalCode::EmptyUndo, "nothing to undo"});
    return out;
  }
  UndoRecord record = std::move(board.undo_stack.back());
  board.undo_stack.pop_back();

  MediaObject restored = std::move(record.prior_object);
  if (record.kind == UndoKind::erase) {
    // The erase stopped this channel; resume it so renderer and board agree.
    if (restored.playing) {
      out.commands.push_back(channel_command(restored, *restored.playing, PlaybackAction::start));
    }
  } else if (const MediaObject* current = board.find(record.object_id)) {
    // Playback is not undoable.
    restored.playing = current->playing;
  }
  board.objects[record.object_id] = std::move(restored);
  board.z_order = std::move(record.prior_z_order);
  return out;
}

std::vector<std::string> validate(const Board& board) {
  std::vector<std::string> problems;
  auto complain = [&](const std::string& what) { problems.push_back(what); };

  std::set<ObjectId> in_z;
  for (const auto& id : board.z_order) {
    if (!in_z.insert(id).second) complain("duplicate z_order entry " + id);
    if (board.find(id) == nullptr) complain("dangling z_order entry " + id);
  }
  for (const auto& [key, obj] : board.objects) {
    if (key != obj.id) complain("object keyed " + key + " has id " + obj.id);
    if (!in_z.contains(key)) complain("object missing from z_order " + key);
    if (!is_valid(obj.rect)) complain("invalid rect on " + key + " " + describe(obj.rect));
    if (obj.av_channels.size() > static_cast<std::size_t>(kMaxChannels)) {
      complain("too many channels on " + key);
    }
    if (obj.zoom_saved && !(obj.rect == kFullBoard)) complain("zoomed but not full board " + key);
    if (obj.zoom_saved && !is_valid(*obj.zoom_saved)) complain("invalid zoom_saved on " + key);
    if (obj.playing &&
        (*obj.playing < 1 || *obj.playing > static_cast<int>(obj.av_channels.size()))) {
      complain("playing missing channel on " + key);
    }
    if (!board.catalog || board.catalog->find(key) == nullptr) {
      complain("object not declared by poster " + key);
    }
  }
  if (board.pending && board.find(board.pending->object_id) == nullptr) {
    complain("pending gesture on absent object " + board.pending->object_id);
  }
  for (const auto& [token, cell] : board.presence) {
    if (!is_valid(cell)) complain("token resting off board " + std::string(to_string(token)));
  }
  return problems;
}

}  // namespace storygrid
