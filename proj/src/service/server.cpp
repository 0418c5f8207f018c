#include "storygrid/service/server.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <deque>
#include <iostream>
#include <optional>
#include <thread>
#include <vector>

#include "storygrid/devlog.hpp"
#include "storygrid/error.hpp"

namespace storygrid::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

constexpr std::size_t kBodyLimit = 4 * 1024 * 1024;

// Splits "/a/b/c" into {"a","b","c"}, dropping any query string.
std::vector<std::string> path_parts(std::string_view target) {
  target = target.substr(0, target.find('?'));
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos < target.size()) {
    if (target[pos] == '/') {
      ++pos;
      continue;
    }
    std::size_t end = target.find('/', pos);
    if (end == std::string_view::npos) end = target.size();
    parts.emplace_back(target.substr(pos, end - pos));
    pos = end;
  }
  return parts;
}

http::status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownPoster:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownLayout:
      return http::status::not_found;
    default:
      return http::status::bad_request;
  }
}

Response make_response(const Request& req, http::status status, std::string body,
                       std::string_view content_type = "application/json") {
  Response res{status, req.version()};
  res.set(http::field::server, "storygrid");
  res.set(http::field::content_type, std::string(content_type));
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = std::move(body);
  res.prepare_payload();
  return res;
}

Response json_response(const Request& req, http::status status, const Json& j) {
  return make_response(req, status, j.dump() + "\n");
}

Response error_response(const Request& req, const Error& e) {
  return json_response(req, status_for(e.code()), error_message(e.code(), e.what()));
}

Response route(SessionManager& manager, const Request& req) {
  const auto parts = path_parts(std::string_view(req.target().data(), req.target().size()));
  const auto method = req.method();

  if (method == http::verb::options) {
    Response res = make_response(req, http::status::no_content, "");
    res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
    res.set(http::field::access_control_allow_headers, "Content-Type");
    return res;
  }

  try {
    if (parts.size() == 1 && parts[0] == "posters") {
      if (method == http::verb::get) return json_response(req, http::status::ok, manager.list_posters());
      if (method == http::verb::post) {
        const std::string id = manager.add_poster(req.body());
        return json_response(req, http::status::created, Json{{"poster_id", id}});
      }
    } else if (parts.size() == 1 && parts[0] == "sessions") {
      if (method == http::verb::get) return json_response(req, http::status::ok, manager.list_sessions());
      if (method == http::verb::post) {
        Json body;
        try {
          body = Json::parse(req.body());
        } catch (const Json::parse_error& e) {
          throw Error(ErrorCode::MalformedMessage, e.what());
        }
        if (!body.is_object() || !body.contains("poster_id") || !body["poster_id"].is_string()) {
          throw Error(ErrorCode::MalformedMessage, "expected {\"poster_id\": <string>}");
        }
        const std::string id = manager.create_session(body["poster_id"].get<std::string>());
        return json_response(req, http::status::created, Json{{"session_id", id}});
      }
    } else if (parts.size() == 3 && parts[0] == "sessions") {
      const std::string& sid = parts[1];
      if (parts[2] == "state" && method == http::verb::get) {
        return json_response(req, http::status::ok, manager.session_state(sid));
      }
      if (parts[2] == "log" && method == http::verb::get) {
        const auto log = manager.event_log(sid);
        return make_response(req, http::status::ok, devlog::serialize_log(log), "application/x-ndjson");
      }
      if (parts[2] == "messages" && method == http::verb::post) {
        manager.session_state(sid);  // 404 before parsing
        Json reply = manager.handle_message(sid, req.body());
        const bool ok = reply["type"] == "ack";
        return json_response(req, ok ? http::status::ok : http::status::bad_request, reply);
      }
    }
  } catch (const Error& e) {
    return error_response(req, e);
  }
  return json_response(req, http::status::not_found,
                       error_message(ErrorCode::MalformedMessage, "no route for " + std::string(req.target())));
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, SessionManager& manager, std::string session_id)
      : ws_(std::move(socket)), manager_(manager), session_id_(std::move(session_id)) {}

  ~WsConnection() {
    if (subscriber_) manager_.unsubscribe(session_id_, *subscriber_);
  }

  void run(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kBodyLimit);
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsConnection> weak = shared_from_this();
    auto executor = ws_.get_executor();
    try {
      subscriber_ = manager_.subscribe(session_id_, [weak, executor](const std::string& text) {
        net::post(executor, [weak, text] {
          if (auto self = weak.lock()) self->enqueue(text);
        });
      });
    } catch (const Error& e) {
      enqueue(error_message(e.code(), e.what()).dump());
      return;
    }
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    const std::string reply = manager_.handle_message(session_id_, text).dump();
    // Posted so it queues behind any broadcasts the message triggered.
    net::post(ws_.get_executor(), [self = shared_from_this(), reply] { self->enqueue(reply); });
    do_read();
  }

  void enqueue(std::string text) {
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  SessionManager& manager_;
  std::string session_id_;
  std::optional<SubscriberId> subscriber_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, SessionManager& manager)
      : stream_(std::move(socket)), manager_(manager) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpConnection::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    parser_.emplace();
    parser_->body_limit(kBodyLimit);
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, *parser_,
                     beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    Request req = parser_->release();

    if (websocket::is_upgrade(req)) {
      const auto parts = path_parts(std::string_view(req.target().data(), req.target().size()));
      if (parts.size() == 3 && parts[0] == "sessions" && parts[2] == "stream") {
        try {
          manager_.session_state(parts[1]);
        } catch (const Error& e) {
          send(error_response(req, e));
          return;
        }
        stream_.expires_never();
        std::make_shared<WsConnection>(stream_.release_socket(), manager_, parts[1])->run(std::move(req));
        return;
      }
    }
    send(route(manager_, req));
  }

  void send(Response res) {
    auto shared = std::make_shared<Response>(std::move(res));
    http::async_write(stream_, *shared,
                      [self = shared_from_this(), shared](beast::error_code ec, std::size_t) {
                        self->on_write(shared->need_eof(), ec);
                      });
  }

  void on_write(bool close, beast::error_code ec) {
    if (ec) return;
    if (close) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    do_read();
  }

  beast::tcp_stream stream_;
  SessionManager& manager_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
};

class Listener : public std::enable_shared_from_this<Listener> {
 public:
  Listener(net::io_context& ioc, tcp::endpoint endpoint, SessionManager& manager)
      : ioc_(ioc), acceptor_(net::make_strand(ioc)), manager_(manager) {
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() { do_accept(); }

 private:
  void do_accept() {
    acceptor_.async_accept(net::make_strand(ioc_),
                           beast::bind_front_handler(&Listener::on_accept, shared_from_this()));
  }

  void on_accept(beast::error_code ec, tcp::socket socket) {
    if (ec == net::error::operation_aborted) return;
    if (!ec) std::make_shared<HttpConnection>(std::move(socket), manager_)->run();
    do_accept();
  }

  net::io_context& ioc_;
  tcp::acceptor acceptor_;
  SessionManager& manager_;
};

}  // namespace

struct Server::Impl {
  net::io_context ioc;
  std::shared_ptr<Listener> listener;
  std::vector<std::thread> threads;
};

Server::Server(SessionManager& manager, const std::string& address, unsigned short port)
    : impl_(std::make_unique<Impl>()) {
  impl_->listener = std::make_shared<Listener>(
      impl_->ioc, tcp::endpoint{net::ip::make_address(address), port}, manager);
  impl_->listener->start();
}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->listener->port(); }

void Server::start(std::size_t threads) {
  for (std::size_t i = 0; i < std::max<std::size_t>(threads, 1); ++i) {
    impl_->threads.emplace_back([this] { impl_->ioc.run(); });
  }
}

void Server::run() { impl_->ioc.run(); }

void Server::run_until_signal() {
  net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
  signals.async_wait([this](beast::error_code, int) { impl_->ioc.stop(); });
  impl_->ioc.run();
}

void Server::stop() {
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
}

}  // namespace storygrid::service
