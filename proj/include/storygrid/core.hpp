#pragma once

#include <optional>
#include <string>
#include <vector>

#include "storygrid/types.hpp"

// Primitive board operations. Each mutating operation either completes or
// throws storygrid::Error before touching the board.
namespace storygrid {

// Id of the frontmost object covering `cell`, if any.
std::optional<ObjectId> topmost_at(const Board& board, CellCoord cell);

// Moves the object so its origin is `new_origin`. A zero displacement leaves
// the board untouched. Throws UnknownObject or OutOfBounds.
Outcome move_object(Board& board, const ObjectId& id, CellCoord new_origin);

// Boundary cell index of `edge` (column for left/right, row for top/bottom).
int edge_line(const Rect& rect, Edge edge);

// Rect obtained by moving `edge` to `target_line` with the opposite edge
// fixed; nullopt if that rect is not a valid on-board rect.
std::optional<Rect> resized_rect(const Rect& rect, Edge edge, int target_line);

// Throws UnknownObject or InvalidResize. Zero displacement is a no-op.
Outcome resize_object(Board& board, const ObjectId& id, Edge edge, int target_line);

Outcome zoom_toggle(Board& board, const ObjectId& id);

// Stops any playback on the object, then removes it. Throws UnknownObject.
Outcome erase_object(Board& board, const ObjectId& id);

// Pops the last move/resize/erase record. Emits EmptyUndo when there is none.
Outcome undo(Board& board);

void bring_to_front(Board& board, const ObjectId& id);

// Human-readable list of invariant violations; empty for a healthy board.
std::vector<std::string> validate(const Board& board);

}  // namespace storygrid
