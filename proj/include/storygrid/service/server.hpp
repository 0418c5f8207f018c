#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "storygrid/service/session_manager.hpp"

namespace storygrid::service {

// HTTP + WebSocket front end for a SessionManager.
//
//   POST /posters                 manifest JSON -> {"poster_id"}
//   GET  /posters                 [{"poster_id","title","objects"}]
//   POST /sessions                {"poster_id"} -> {"session_id"}
//   GET  /sessions                [{"session_id","poster_id"}]
//   GET  /sessions/<id>/state     {"session_id","poster_id","seq","board"}
//   GET  /sessions/<id>/log       accepted token events as JSON lines
//   POST /sessions/<id>/messages  one client message -> ack or error
//   GET  /sessions/<id>/stream    WebSocket upgrade; bidirectional messages
//
// The manager must outlive the server.
class Server {
 public:
  // Binds immediately; port 0 picks a free port.
  Server(SessionManager& manager, const std::string& address, unsigned short port);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;

  // Serves on `threads` background threads until stop().
  void start(std::size_t threads = 1);
  // Serves on the calling thread until stop() is called elsewhere.
  void run();
  // Like run(), returning after SIGINT or SIGTERM.
  void run_until_signal();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace storygrid::service
