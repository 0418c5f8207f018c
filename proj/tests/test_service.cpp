#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <filesystem>
#include <thread>

#include "doctest.h"
#include "storygrid/devlog.hpp"
#include "storygrid/error.hpp"
#include "storygrid/service/server.hpp"
#include "storygrid/service/session_manager.hpp"
#include "test_support.hpp"

using namespace storygrid;
using namespace storygrid::service;

namespace {

constexpr const char* kPoster = R"({"poster_id":"tale","title":"A Tale","objects":[
  {"id":"A","image_ref":"a.png","av_channels":[{"kind":"video","media_ref":"a.mp4"}]},
  {"id":"B","image_ref":"b.png"}],
  "initial_layout":{"name":"init","entries":[
    {"object_id":"A","rect":{"col":1,"row":1,"w":2,"h":2}},
    {"object_id":"B","rect":{"col":5,"row":5,"w":1,"h":1}}]}})";

std::string event(const char* token, const char* phase, int col, int row, long ts = -1) {
  Json j{{"type", "token_event"}, {"token", token}, {"phase", phase}, {"col", col}, {"row", row}};
  if (ts >= 0) j["ts_ms"] = ts;
  return j.dump();
}

struct Recorder {
  std::vector<Json> messages;
  Sink sink() {
    return [this](const std::string& text) { messages.push_back(Json::parse(text)); };
  }
};

}  // namespace

TEST_CASE("session manager") {
  SessionManager mgr;
  CHECK(mgr.add_poster(kPoster) == "tale");
  const std::string sid = mgr.create_session("tale");
  CHECK(sid == "s1");

  SUBCASE("zoom placement yields exactly one state message") {
    Recorder r;
    mgr.subscribe(sid, r.sink());
    REQUIRE(r.messages.size() == 1);  // current state on subscribe
    CHECK(r.messages[0]["seq"] == 0);

    CHECK(mgr.handle_message(sid, event("Zoomer", "placed", 1, 1))["type"] == "ack");
    REQUIRE(r.messages.size() == 2);
    const Json& m = r.messages[1];
    CHECK(m["type"] == "state");
    CHECK(m["seq"] == 1);
    CHECK(m["board"]["objects"][0]["rect"] == Json{{"col", 0}, {"row", 0}, {"w", 8}, {"h", 8}});

    // lift changes presence only: still one state message
    mgr.handle_message(sid, event("Zoomer", "lifted", 1, 1));
    REQUIRE(r.messages.size() == 3);
    CHECK(r.messages[2]["type"] == "state");
    CHECK(r.messages[2]["seq"] == 2);
  }
  SUBCASE("signals and playback follow the state message") {
    Recorder r;
    mgr.subscribe(sid, r.sink());
    mgr.handle_message(sid, event("Player1", "placed", 1, 1));
    REQUIRE(r.messages.size() == 3);
    CHECK(r.messages[1]["type"] == "state");
    CHECK(r.messages[2]["type"] == "playback");
    CHECK(r.messages[2]["action"] == "start");
    CHECK(r.messages[2]["media_ref"] == "a.mp4");

    mgr.handle_message(sid, event("Player1", "placed", 7, 7));
    CHECK(r.messages.back()["type"] == "signal");
    CHECK(r.messages.back()["code"] == "NotOnObject");

    // media ends: flag clears, late duplicate does nothing
    CHECK(mgr.handle_message(sid, R"({"type":"media_ended","object_id":"A"})")["type"] == "ack");
    CHECK(mgr.session_state(sid)["board"]["objects"][0]["playing"].is_null());
    const auto n = r.messages.size();
    mgr.handle_message(sid, R"({"type":"media_ended","object_id":"A"})");
    mgr.handle_message(sid, R"({"type":"media_ended","object_id":"ghost"})");
    CHECK(r.messages.size() == n);
  }
  SUBCASE("every subscriber sees the same sequence") {
    Recorder a, b;
    mgr.subscribe(sid, a.sink());
    mgr.subscribe(sid, b.sink());
    for (const char* tok : {"Mover", "Resizer", "Zoomer"}) {
      mgr.handle_message(sid, event(tok, "placed", 1, 1));
      mgr.handle_message(sid, event(tok, "lifted", 1, 1));
    }
    mgr.handle_message(sid, event("Mover", "placed", 5, 5));
    mgr.handle_message(sid, event("Mover", "placed", 3, 3));
    CHECK(a.messages == b.messages);
    std::uint64_t last = 0;
    for (const auto& m : a.messages) {
      CHECK(m["seq"].get<std::uint64_t>() >= last);
      last = m["seq"];
    }
  }
  SUBCASE("unsubscribed sinks stop receiving") {
    Recorder r;
    auto id = mgr.subscribe(sid, r.sink());
    mgr.unsubscribe(sid, id);
    mgr.handle_message(sid, event("Zoomer", "placed", 1, 1));
    CHECK(r.messages.size() == 1);
  }
  SUBCASE("errors leave the session untouched") {
    const Json before = mgr.session_state(sid);
    auto code = [&](const std::string& text) { return mgr.handle_message(sid, text)["code"]; };
    CHECK(code("not json") == "MalformedMessage");
    CHECK(code(R"({"type":"dance"})") == "MalformedMessage");
    CHECK(code(R"([1,2])") == "MalformedMessage");
    CHECK(code(event("Mover", "placed", 8, 0)) == "MalformedMessage");
    CHECK(code(R"({"type":"token_event","token":"Hammer","phase":"placed","col":0,"row":0})") ==
          "MalformedMessage");
    CHECK(code(R"({"type":"restore_layout","name":"nope"})") == "UnknownLayout");
    CHECK(code(R"({"type":"save_layout","name":"../etc"})") == "MalformedMessage");
    CHECK(mgr.session_state(sid) == before);
    CHECK(mgr.handle_message("s99", event("Mover", "placed", 0, 0))["code"] == "UnknownSession");
  }
  SUBCASE("unknown poster and session") {
    CHECK_THROWS_AS(mgr.create_session("nope"), Error);
    CHECK_THROWS_AS(mgr.session_state("s42"), Error);
    CHECK_THROWS_AS(mgr.subscribe("s42", [](const std::string&) {}), Error);
  }
  SUBCASE("sessions are independent") {
    const std::string other = mgr.create_session("tale");
    CHECK(other == "s2");
    mgr.handle_message(sid, event("Eraser", "placed", 5, 5));
    CHECK(mgr.session_state(sid)["board"]["objects"].size() == 1);
    CHECK(mgr.session_state(other)["board"]["objects"].size() == 2);
    CHECK(mgr.list_sessions().size() == 2);
  }
  SUBCASE("save and restore") {
    CHECK(mgr.handle_message(sid, R"({"type":"save_layout","name":"start"})")["type"] == "ack");
    mgr.handle_message(sid, event("Eraser", "placed", 1, 1));
    CHECK(mgr.session_state(sid)["board"]["objects"].size() == 1);
    Recorder r;
    mgr.subscribe(sid, r.sink());
    CHECK(mgr.handle_message(sid, R"({"type":"restore_layout","name":"start"})")["type"] == "ack");
    CHECK(mgr.session_state(sid)["board"]["objects"].size() == 2);
    CHECK(mgr.session_state(sid)["board"]["undo_stack"].empty());
    CHECK(r.messages.back()["type"] == "state");
  }
  SUBCASE("timestamps are normalized to a monotonic log") {
    mgr.handle_message(sid, event("Zoomer", "placed", 1, 1, 5000));
    mgr.handle_message(sid, event("Zoomer", "lifted", 1, 1, 4000));
    mgr.handle_message(sid, event("Zoomer", "placed", 1, 1));
    auto log = mgr.event_log(sid);
    REQUIRE(log.size() == 3);
    CHECK(log[1].ts_ms == 5000);
    CHECK(log[2].ts_ms >= 0);
  }
}

TEST_CASE("concurrent clients see a linearizable history") {
  SessionManager mgr;
  mgr.add_poster(storygrid::testing::fixture("macbeth_poster.json"));
  const std::string sid = mgr.create_session("macbeth");
  Recorder r;
  mgr.subscribe(sid, r.sink());

  const auto records = devlog::parse_log(storygrid::testing::fixture("macbeth_session.jsonl"));
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < 400; i += 4) {
        Json j{{"type", "token_event"},
               {"token", to_string(records[i].token)},
               {"phase", gesture::to_string(records[i].phase)},
               {"col", records[i].cell.col},
               {"row", records[i].cell.row}};
        mgr.handle_message(sid, j.dump());
      }
    });
  }
  for (auto& th : threads) th.join();

  // Replaying the accepted order serially reproduces the final board.
  const auto log = mgr.event_log(sid);
  CHECK(log.size() == 400);
  Board serial = persist::load_poster(persist::parse_manifest(storygrid::testing::fixture("macbeth_poster.json")));
  for (const auto& e : log) gesture::consume(serial, e);
  CHECK(persist::to_json(serial) == mgr.session_state(sid)["board"]);
  CHECK(mgr.session_state(sid)["seq"] == 400);

  // The last state broadcast matches the final board.
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
    if ((*it)["type"] == "state") {
      CHECK((*it)["board"] == persist::to_json(serial));
      break;
    }
  }
}

TEST_CASE("data directory survives a restart") {
  const auto dir = std::filesystem::temp_directory_path() / ("storygrid-test-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  {
    SessionManager mgr(dir);
    mgr.add_poster(kPoster);
    const auto sid = mgr.create_session("tale");
    mgr.handle_message(sid, event("Mover", "placed", 5, 5));
    mgr.handle_message(sid, event("Mover", "placed", 0, 7));
    mgr.save_layout(sid, "moved");
  }
  {
    SessionManager mgr(dir);
    CHECK(mgr.list_posters().size() == 1);
    const auto sid = mgr.create_session("tale");
    CHECK(sid == "s1");
    mgr.restore_layout(sid, "moved");
    auto board = mgr.session_state(sid)["board"];
    CHECK(board["objects"][1]["rect"] == Json{{"col", 0}, {"row", 7}, {"w", 1}, {"h", 1}});
  }
  std::filesystem::remove_all(dir);
}

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

http::response<http::string_body> request(unsigned short port, http::verb verb, const std::string& target,
                                          const std::string& body = "") {
  boost::asio::io_context ioc;
  tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::string_body> req{verb, target, 11};
  req.set(http::field::host, "127.0.0.1");
  req.set(http::field::content_type, "application/json");
  req.body() = body;
  req.prepare_payload();
  http::write(stream, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  beast::error_code ec;
  stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  return res;
}

struct WsClient {
  boost::asio::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};

  WsClient(unsigned short port, const std::string& target) {
    tcp::resolver resolver(ioc);
    boost::asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", target);
  }
  Json read() {
    beast::flat_buffer buffer;
    ws.read(buffer);
    return Json::parse(beast::buffers_to_string(buffer.data()));
  }
  void write(const std::string& text) { ws.write(boost::asio::buffer(text)); }
  // Reads until a message of `type` arrives.
  Json read_until(const std::string& type) {
    for (;;) {
      Json j = read();
      if (j["type"] == type) return j;
    }
  }
};

}  // namespace

TEST_CASE("http and websocket transport") {
  SessionManager mgr;
  Server server(mgr, "127.0.0.1", 0);
  server.start(2);
  const unsigned short port = server.port();
  REQUIRE(port != 0);

  auto res = request(port, http::verb::post, "/posters", kPoster);
  CHECK(res.result() == http::status::created);
  CHECK(Json::parse(res.body())["poster_id"] == "tale");
  CHECK(request(port, http::verb::post, "/posters", "{").result() == http::status::bad_request);
  CHECK(Json::parse(request(port, http::verb::get, "/posters").body()).size() == 1);

  res = request(port, http::verb::post, "/sessions", R"({"poster_id":"tale"})");
  REQUIRE(res.result() == http::status::created);
  const std::string sid = Json::parse(res.body())["session_id"];
  CHECK(request(port, http::verb::post, "/sessions", R"({"poster_id":"x"})").result() ==
        http::status::not_found);
  CHECK(request(port, http::verb::get, "/sessions/zz/state").result() == http::status::not_found);
  CHECK(request(port, http::verb::get, "/nowhere").result() == http::status::not_found);

  {
    WsClient a(port, "/sessions/" + sid + "/stream");
    WsClient b(port, "/sessions/" + sid + "/stream");
    CHECK(a.read()["type"] == "state");
    CHECK(b.read()["type"] == "state");

    a.write(event("Zoomer", "placed", 1, 1));
    Json sa = a.read_until("state");
    Json ack = a.read_until("ack");
    CHECK(ack["seq"] == 1);
    Json sb = b.read_until("state");
    CHECK(sa == sb);
    CHECK(sa["board"]["objects"][0]["rect"]["w"] == 8);

    a.write("garbage");
    CHECK(a.read_until("error")["code"] == "MalformedMessage");

    // HTTP message path broadcasts to sockets too
    res = request(port, http::verb::post, "/sessions/" + sid + "/messages", event("Player1", "placed", 0, 0));
    CHECK(Json::parse(res.body())["type"] == "ack");
    CHECK(b.read_until("playback")["action"] == "start");
    a.ws.close(websocket::close_code::normal);
    b.ws.close(websocket::close_code::normal);
  }

  res = request(port, http::verb::get, "/sessions/" + sid + "/state");
  CHECK(Json::parse(res.body())["seq"] == 2);
  res = request(port, http::verb::get, "/sessions/" + sid + "/log");
  CHECK(devlog::parse_log(res.body()).size() == 2);

  bool refused = false;
  try {
    WsClient c(port, "/sessions/zz/stream");
  } catch (const beast::system_error&) {
    refused = true;
  }
  CHECK(refused);
  server.stop();
}
