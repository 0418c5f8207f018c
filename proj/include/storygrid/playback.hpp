#pragma once

#include "storygrid/types.hpp"

namespace storygrid::playback {

// Starts `channel` (1 or 2) on the object. Switching from the other channel
// emits its stop first. Throws UnknownObject.
Outcome play(Board& board, const ObjectId& id, int channel);

// Throws UnknownObject; an idle object yields NotPlaying.
Outcome stop(Board& board, const ObjectId& id);

// One stop command per active object, in z-order (back to front).
Outcome stop_all(Board& board);

// Renderer reported natural end of media. Late or unknown ids are ignored.
void on_media_ended(Board& board, const ObjectId& id);

}  // namespace storygrid::playback
