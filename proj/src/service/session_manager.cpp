#include "storygrid/service/session_manager.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "storygrid/error.hpp"
#include "storygrid/playback.hpp"

namespace storygrid::service {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Keeps client-chosen names from escaping the data directory.
bool safe_name(const std::string& name) {
  if (name.empty() || name.size() > 128) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return name != "." && name != "..";
}

}  // namespace

struct SessionManager::Session {
  std::string id;
  std::string poster_id;
  mutable std::mutex mutex;
  Board board;
  std::uint64_t seq = 0;
  std::map<SubscriberId, Sink> subscribers;
  SubscriberId next_subscriber = 1;
  std::map<std::string, persist::LayoutSnapshot> layouts;
  std::vector<gesture::TokenEvent> log;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
  std::optional<fs::path> layout_dir;

  void broadcast(const Json& message) const {
    const std::string text = message.dump();
    for (const auto& [id, sink] : subscribers) sink(text);
  }

  void broadcast_outcome(const Board& before, const Outcome& outcome) const {
    if (!(board == before)) broadcast(state_message(seq, board));
    for (const auto& s : outcome.signals) broadcast(signal_message(seq, s));
    for (const auto& c : outcome.commands) broadcast(playback_message(seq, c));
  }
};

Json state_message(std::uint64_t seq, const Board& board) {
  Json j;
  j["type"] = "state";
  j["seq"] = seq;
  j["board"] = persist::to_json(board);
  return j;
}

Json signal_message(std::uint64_t seq, const Signal& signal) {
  Json j;
  j["type"] = "signal";
  j["seq"] = seq;
  j["code"] = to_string(signal.code);
  j["detail"] = signal.detail;
  return j;
}

Json playback_message(std::uint64_t seq, const PlaybackCommand& command) {
  Json j;
  j["type"] = "playback";
  j["seq"] = seq;
  j["object_id"] = command.object_id;
  j["channel"] = command.channel;
  j["action"] = to_string(command.action);
  j["media_ref"] = command.media_ref;
  return j;
}

Json error_message(ErrorCode code, const std::string& detail) {
  Json j;
  j["type"] = "error";
  j["code"] = to_string(code);
  j["detail"] = detail;
  return j;
}

gesture::TokenEvent token_event_from_json(const Json& j) {
  auto bad = [](const std::string& what) { return Error(ErrorCode::MalformedMessage, what); };
  auto text = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw bad(std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  };
  auto integer = [&](const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) throw bad(std::string("'") + key + "' must be an integer");
    return it->get<std::int64_t>();
  };

  gesture::TokenEvent e;
  auto token = token_from_string(text("token"));
  if (!token) throw bad("unknown token");
  e.token = *token;
  auto phase = gesture::phase_from_string(text("phase"));
  if (!phase) throw bad("unknown phase");
  e.phase = *phase;
  const auto col = integer("col");
  const auto row = integer("row");
  if (col < 0 || col >= kBoardSize || row < 0 || row >= kBoardSize) throw bad("cell off board");
  e.cell = {static_cast<int>(col), static_cast<int>(row)};
  e.ts_ms = j.contains("ts_ms") ? integer("ts_ms") : -1;
  return e;
}

SessionManager::SessionManager(std::optional<fs::path> data_dir) : data_dir_(std::move(data_dir)) {
  if (!data_dir_) return;
  const fs::path dir = *data_dir_ / "posters";
  if (!fs::is_directory(dir)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    auto manifest = persist::parse_manifest(read_file(entry.path()));
    posters_[manifest.poster_id] = std::move(manifest);
  }
}

SessionManager::~SessionManager() = default;

void SessionManager::persist_poster(const persist::PosterManifest& manifest) const {
  if (!data_dir_ || !safe_name(manifest.poster_id)) return;
  write_file(*data_dir_ / "posters" / (manifest.poster_id + ".json"),
             persist::serialize_manifest(manifest));
}

std::string SessionManager::add_poster(std::string_view manifest_text) {
  auto manifest = persist::parse_manifest(manifest_text);
  std::string id = manifest.poster_id;
  add_poster(std::move(manifest));
  return id;
}

void SessionManager::add_poster(persist::PosterManifest manifest) {
  persist_poster(manifest);
  std::lock_guard lock(mutex_);
  posters_[manifest.poster_id] = std::move(manifest);
}

Json SessionManager::list_posters() const {
  std::lock_guard lock(mutex_);
  Json arr = Json::array();
  for (const auto& [id, m] : posters_) {
    arr.push_back(Json{{"poster_id", id}, {"title", m.title}, {"objects", m.objects.size()}});
  }
  return arr;
}

std::string SessionManager::create_session(const std::string& poster_id) {
  std::lock_guard lock(mutex_);
  auto it = posters_.find(poster_id);
  if (it == posters_.end()) throw Error(ErrorCode::UnknownPoster, poster_id);
  auto session = std::make_shared<Session>();
  session->id = "s" + std::to_string(next_session_++);
  session->poster_id = poster_id;
  session->board = persist::load_poster(it->second);
  if (data_dir_) session->layout_dir = *data_dir_ / "sessions" / session->id;
  sessions_[session->id] = session;
  return session->id;
}

Json SessionManager::list_sessions() const {
  std::lock_guard lock(mutex_);
  Json arr = Json::array();
  for (const auto& [id, s] : sessions_) arr.push_back(Json{{"session_id", id}, {"poster_id", s->poster_id}});
  return arr;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, session_id);
  return it->second;
}

Json SessionManager::session_state(const std::string& session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  Json j;
  j["session_id"] = s->id;
  j["poster_id"] = s->poster_id;
  j["seq"] = s->seq;
  j["board"] = persist::to_json(s->board);
  return j;
}

SubscriberId SessionManager::subscribe(const std::string& session_id, Sink sink) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  sink(state_message(s->seq, s->board).dump());
  const SubscriberId id = s->next_subscriber++;
  s->subscribers.emplace(id, std::move(sink));
  return id;
}

void SessionManager::unsubscribe(const std::string& session_id, SubscriberId id) {
  std::shared_ptr<Session> s;
  try {
    s = find(session_id);
  } catch (const Error&) {
    return;
  }
  std::lock_guard lock(s->mutex);
  s->subscribers.erase(id);
}

std::uint64_t SessionManager::post_event(const std::string& session_id, gesture::TokenEvent event) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);

  if (event.ts_ms < 0) {
    event.ts_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - s->started)
                      .count();
  }
  if (!s->log.empty() && event.ts_ms < s->log.back().ts_ms) event.ts_ms = s->log.back().ts_ms;

  const Board before = s->board;
  gesture::ConsumeResult result = gesture::consume(s->board, event);
  ++s->seq;
  s->log.push_back(event);
  s->broadcast_outcome(before, result.outcome);
  return s->seq;
}

std::uint64_t SessionManager::media_ended(const std::string& session_id, const ObjectId& object_id) {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  const Board before = s->board;
  playback::on_media_ended(s->board, object_id);
  ++s->seq;
  s->broadcast_outcome(before, {});
  return s->seq;
}

std::uint64_t SessionManager::save_layout(const std::string& session_id, const std::string& name) {
  if (!safe_name(name)) throw Error(ErrorCode::MalformedMessage, "bad layout name '" + name + "'");
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  auto snapshot = persist::save_layout(s->board, name);
  if (s->layout_dir) write_file(*s->layout_dir / (name + ".layout.json"), persist::serialize_layout(snapshot));
  s->layouts[name] = std::move(snapshot);
  return ++s->seq;
}

std::uint64_t SessionManager::restore_layout(const std::string& session_id, const std::string& name) {
  if (!safe_name(name)) throw Error(ErrorCode::MalformedMessage, "bad layout name '" + name + "'");
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);

  auto it = s->layouts.find(name);
  if (it == s->layouts.end()) {
    const fs::path path = s->layout_dir ? *s->layout_dir / (name + ".layout.json") : fs::path();
    if (!s->layout_dir || !fs::exists(path)) throw Error(ErrorCode::UnknownLayout, name);
    it = s->layouts.emplace(name, persist::parse_layout(read_file(path))).first;
  }

  const Board before = s->board;
  Outcome outcome = persist::restore_layout(s->board, it->second);
  ++s->seq;
  s->broadcast_outcome(before, outcome);
  return s->seq;
}

Json SessionManager::handle_message(const std::string& session_id, std::string_view text) {
  Json message;
  try {
    message = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    return error_message(ErrorCode::MalformedMessage, e.what());
  }
  if (!message.is_object() || !message.contains("type") || !message["type"].is_string()) {
    return error_message(ErrorCode::MalformedMessage, "message needs a string 'type'");
  }
  const std::string type = message["type"].get<std::string>();
  auto string_arg = [&](const char* key) {
    auto it = message.find(key);
    if (it == message.end() || !it->is_string()) {
      throw Error(ErrorCode::MalformedMessage, std::string("'") + key + "' must be a string");
    }
    return it->get<std::string>();
  };

  try {
    std::uint64_t seq = 0;
    if (type == "token_event") {
      seq = post_event(session_id, token_event_from_json(message));
    } else if (type == "media_ended") {
      seq = media_ended(session_id, string_arg("object_id"));
    } else if (type == "save_layout") {
      seq = save_layout(session_id, string_arg("name"));
    } else if (type == "restore_layout") {
      seq = restore_layout(session_id, string_arg("name"));
    } else {
      return error_message(ErrorCode::MalformedMessage, "unknown message type '" + type + "'");
    }
    return Json{{"type", "ack"}, {"request", type}, {"seq", seq}};
  } catch (const Error& e) {
    return error_message(e.code(), e.what());
  }
}

std::vector<gesture::TokenEvent> SessionManager::event_log(const std::string& session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mutex);
  return s->log;
}

}  // namespace storygrid::service
