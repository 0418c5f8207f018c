#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storygrid/error.hpp"
#include "storygrid/gesture.hpp"
#include "storygrid/persist.hpp"

namespace storygrid::service {

using Json = persist::Json;

// Receives one serialized server->client message. Called with the session
// lock held, so it must not block or call back into the manager.
using Sink = std::function<void(const std::string&)>;

using SubscriberId = std::uint64_t;

// Owns uploaded posters and live sessions. Transport-agnostic: the HTTP and
// WebSocket server and the tests both drive it directly.
//
// Each session applies its events in arrival order under its own lock and
// assigns strictly increasing sequence numbers; sessions are independent.
class SessionManager {
 public:
  // With a data directory, uploaded posters and saved layouts are written
  // below it and saved layouts can be restored after a restart.
  explicit SessionManager(std::optional<std::filesystem::path> data_dir = std::nullopt);
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  // Parses and stores a manifest; replaces any poster with the same id.
  std::string add_poster(std::string_view manifest_text);
  void add_poster(persist::PosterManifest manifest);
  Json list_posters() const;

  // Throws UnknownPoster.
  std::string create_session(const std::string& poster_id);
  Json list_sessions() const;

  // {"session_id","poster_id","seq","board"}. Throws UnknownSession.
  Json session_state(const std::string& session_id) const;

  // Sends the current state to `sink` and registers it for broadcasts.
  SubscriberId subscribe(const std::string& session_id, Sink sink);
  void unsubscribe(const std::string& session_id, SubscriberId id);

  // Each returns the sequence number assigned to the request.
  std::uint64_t post_event(const std::string& session_id, gesture::TokenEvent event);
  std::uint64_t media_ended(const std::string& session_id, const ObjectId& object_id);
  std::uint64_t save_layout(const std::string& session_id, const std::string& name);
  // Throws UnknownLayout or UnknownObjectInSnapshot.
  std::uint64_t restore_layout(const std::string& session_id, const std::string& name);

  // Decodes one client message and applies it. Returns the reply for the
  // sender: {"type":"ack",...} or {"type":"error",...}. Malformed or failed
  // requests leave the session untouched.
  Json handle_message(const std::string& session_id, std::string_view text);

  // Token events accepted so far, as recorded (timestamps normalized).
  std::vector<gesture::TokenEvent> event_log(const std::string& session_id) const;

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& session_id) const;
  void persist_poster(const persist::PosterManifest& manifest) const;

  std::optional<std::filesystem::path> data_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, persist::PosterManifest> posters_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;
};

// Message encoders shared by the manager and tests.
Json state_message(std::uint64_t seq, const Board& board);
Json signal_message(std::uint64_t seq, const Signal& signal);
Json playback_message(std::uint64_t seq, const PlaybackCommand& command);
Json error_message(ErrorCode code, const std::string& detail);

// Throws MalformedMessage.
gesture::TokenEvent token_event_from_json(const Json& j);

}  // namespace storygrid::service
