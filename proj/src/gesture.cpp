#include "storygrid/gesture.hpp"

#include <cstdlib>
#include <string>

#include "storygrid/core.hpp"
#include "storygrid/error.hpp"
#include "storygrid/playback.hpp"

namespace storygrid::gesture {

std::string_view to_string(Phase phase) { return phase == Phase::placed ? "placed" : "lifted"; }

std::optional<Phase> phase_from_string(std::string_view s) {
  if (s == "placed") return Phase::placed;
  if (s == "lifted") return Phase::lifted;
  return std::nullopt;
}

namespace {

using Kind = PendingGesture::Kind;

std::string cell_text(CellCoord c) {
  return "(" + std::to_string(c.col) + "," + std::to_string(c.row) + ")";
}

TokenKind owner_of(const PendingGesture& p) {
  return p.kind == Kind::move_awaiting_target ? TokenKind::Mover : TokenKind::Resizer;
}

// Edges of `rect` whose boundary line passes through `cell`, in priority order.
std::vector<Edge> edges_at(const Rect& rect, CellCoord cell) {
  std::vector<Edge> edges;
  if (cell.col == rect.left()) edges.push_back(Edge::left);
  if (cell.col == rect.right()) edges.push_back(Edge::right);
  if (cell.row == rect.top()) edges.push_back(Edge::top);
  if (cell.row == rect.bottom()) edges.push_back(Edge::bottom);
  return edges;
}

class Interpreter {
 public:
  Interpreter(Board& board, const TokenEvent& event) : board_(board), event_(event) {}

  ConsumeResult run() {
    board_.presence[event_.token] = event_.cell;

    if (board_.pending && owner_of(*board_.pending) != event_.token) {
      signal(SignalCode::GestureCancelled,
             std::string(to_string(owner_of(*board_.pending))) + " on " + board_.pending->object_id);
      board_.pending.reset();
    }

    switch (event_.token) {
      case TokenKind::Mover:
        mover();
        break;
      case TokenKind::Resizer:
        resizer();
        break;
      case TokenKind::Player1:
        player(1);
        break;
      case TokenKind::Player2:
        player(2);
        break;
      case TokenKind::Stopper:
        stopper();
        break;
      case TokenKind::Undoer:
        undoer();
        break;
      case TokenKind::Zoomer:
        on_target([&](const ObjectId& id) { merge(zoom_toggle(board_, id)); complete(); });
        break;
      case TokenKind::Eraser:
        on_target([&](const ObjectId& id) { merge(erase_object(board_, id)); complete(); });
        break;
    }
    return std::move(result_);
  }

 private:
  void signal(SignalCode code, std::string detail) {
    result_.outcome.signals.push_back({code, std::move(detail)});
  }

  void merge(Outcome out) { result_.outcome.append(std::move(out)); }

  void complete() { result_.completed = CompletedOp{event_.token, event_.ts_ms}; }

  std::optional<ObjectId> target() const { return topmost_at(board_, event_.cell); }

  template <typename Fn>
  void on_target(Fn&& fn) {
    if (auto id = target()) {
      fn(*id);
    } else {
      signal(SignalCode::NotOnObject, cell_text(event_.cell));
    }
  }

  void mover() {
    if (board_.pending) {
      const PendingGesture& p = *board_.pending;
      const MediaObject& obj = *board_.find(p.object_id);
      Rect next = obj.rect;
      next.origin = {event_.cell.col - p.anchor.col, event_.cell.row - p.anchor.row};
      if (!is_valid(next)) {
        signal(SignalCode::DestinationOutOfBounds, p.object_id + " at " + cell_text(next.origin));
        return;
      }
      ObjectId id = p.object_id;
      board_.pending.reset();
      if (next == obj.rect) signal(SignalCode::OpCompleted, "move of " + id + " has no displacement");
      merge(move_object(board_, id, next.origin));
      complete();
      return;
    }
    on_target([&](const ObjectId& id) {
      const Rect& rect = board_.find(id)->rect;
      board_.pending = PendingGesture{
          Kind::move_awaiting_target,
          id,
          {event_.cell.col - rect.origin.col, event_.cell.row - rect.origin.row},
          {}};
    });
  }

  void resizer() {
    if (board_.pending) {
      finish_resize();
      return;
    }
    on_target([&](const ObjectId& id) {
      auto edges = edges_at(board_.find(id)->rect, event_.cell);
      if (edges.empty()) {
        signal(SignalCode::NotOnBorder, id + " at " + cell_text(event_.cell));
        return;
      }
      board_.pending = PendingGesture{Kind::resize_awaiting_target, id, {}, std::move(edges)};
    });
  }

  void finish_resize() {
    PendingGesture p = std::move(*board_.pending);
    board_.pending.reset();
    const Rect rect = board_.find(p.object_id)->rect;

    std::optional<Edge> best;
    int best_shift = 0;
    bool any_zero = false;
    for (Edge edge : p.candidate_edges) {
      const bool horizontal = edge == Edge::left || edge == Edge::right;
      const int target_line = horizontal ? event_.cell.col : event_.cell.row;
      if (!resized_rect(rect, edge, target_line)) continue;
      const int shift = std::abs(target_line - edge_line(rect, edge));
      if (shift == 0) {
        any_zero = true;
      } else if (shift > best_shift) {
        best = edge;
        best_shift = shift;
      }
    }

    if (best) {
      const bool horizontal = *best == Edge::left || *best == Edge::right;
      merge(resize_object(board_, p.object_id, *best, horizontal ? event_.cell.col : event_.cell.row));
      complete();
    } else if (any_zero) {
      signal(SignalCode::OpCompleted, "resize of " + p.object_id + " has no displacement");
      complete();
    } else {
      signal(SignalCode::InvalidResizeTarget, p.object_id + " to " + cell_text(event_.cell));
    }
  }

  void player(int channel) {
    on_target([&](const ObjectId& id) {
      Outcome out = playback::play(board_, id, channel);
      const bool started = !out.commands.empty();
      merge(std::move(out));
      if (started) complete();
    });
  }

  void stopper() {
    if (auto id = target()) {
      Outcome out = playback::stop(board_, *id);
      const bool stopped = !out.commands.empty();
      merge(std::move(out));
      if (stopped) complete();
      return;
    }
    Outcome out = playback::stop_all(board_);
    if (out.commands.empty()) signal(SignalCode::OpCompleted, "stop all: nothing playing");
    merge(std::move(out));
    complete();
  }

  void undoer() {
    Outcome out = undo(board_);
    const bool empty = !out.signals.empty() && out.signals.front().code == SignalCode::EmptyUndo;
    merge(std::move(out));
    if (!empty) complete();
  }

  Board& board_;
  const TokenEvent& event_;
  ConsumeResult result_;
};

}  // namespace

ConsumeResult consume(Board& board, const TokenEvent& event) {
  if (!is_valid(event.cell)) {
    throw Error(ErrorCode::InvalidCell, cell_text(event.cell));
  }
  if (event.phase == Phase::lifted) {
    board.presence.erase(event.token);
    return {};
  }
  return Interpreter(board, event).run();
}

}  // namespace storygrid::gesture
