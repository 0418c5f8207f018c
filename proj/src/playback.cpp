#include "storygrid/playback.hpp"

#include "storygrid/error.hpp"

namespace storygrid::playback {

namespace {

MediaObject& require(Board& board, const ObjectId& id) {
  MediaObject* obj = board.find(id);
  if (obj == nullptr) throw Error(ErrorCode::UnknownObject, id);
  return *obj;
}

PlaybackCommand command(const MediaObject& obj, int channel, PlaybackAction action) {
  return {obj.id, channel, action,
          obj.av_channels.at(static_cast<std::size_t>(channel - 1)).media_ref};
}

void stop_one(MediaObject& obj, Outcome& out) {
  out.commands.push_back(command(obj, *obj.playing, PlaybackAction::stop));
  obj.playing.reset();
}

}  // namespace

Outcome play(Board& board, const ObjectId& id, int channel) {
  MediaObject& obj = require(board, id);
  Outcome out;
  if (channel < 1 || channel > static_cast<int>(obj.av_channels.size())) {
    out.signals.push_back({SignalCode::NoSuchChannel, id + " has no channel " + std::to_string(channel)});
    return out;
  }
  if (obj.playing == channel) {
    out.signals.push_back({SignalCode::AlreadyPlaying, id + " channel " + std::to_string(channel)});
    return out;
  }
  if (obj.playing) stop_one(obj, out);
  out.commands.push_back(command(obj, channel, PlaybackAction::start));
  obj.playing = channel;
  return out;
}

Outcome stop(Board& board, const ObjectId& id) {
  MediaObject& obj = require(board, id);
  Outcome out;
  if (!obj.playing) {
    out.signals.push_back({SignalCode::NotPlaying, id});
    return out;
  }
  stop_one(obj, out);
  return out;
}

Outcome stop_all(Board& board) {
  Outcome out;
  for (const auto& id : board.z_order) {
    MediaObject* obj = board.find(id);
    if (obj != nullptr && obj->playing) stop_one(*obj, out);
  }
  return out;
}

void on_media_ended(Board& board, const ObjectId& id) {
  if (MediaObject* obj = board.find(id)) obj->playing.reset();
}

}  // namespace storygrid::playback
