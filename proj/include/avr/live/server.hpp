#pragma once

// WebSocket host for live sessions. One io_context thread does everything:
// network reads only enqueue text, and each connection's timer drives
// Session::tick() on absolute deadlines, so message rate cannot change the
// step count or spacing.

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "avr/live/session.hpp"

namespace avr::live {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

struct ServerOptions {
  std::shared_ptr<const SessionOptions> session;
  std::filesystem::path static_root;  // serves GET / ; empty disables
  std::chrono::nanoseconds tick_period = std::chrono::milliseconds(1000 / kTickHz);
  std::function<void(const std::string&)> log;  // optional
};

inline std::string mime_type(const std::filesystem::path& p) {
  const std::string e = p.extension().string();
  if (e == ".html") return "text/html";
  if (e == ".js" || e == ".mjs") return "application/javascript";
  if (e == ".css") return "text/css";
  if (e == ".json") return "application/json";
  if (e == ".png") return "image/png";
  if (e == ".svg") return "image/svg+xml";
  if (e == ".wasm") return "application/wasm";
  return "application/octet-stream";
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket socket, std::shared_ptr<const ServerOptions> opts)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), opts_(std::move(opts)) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->deadline_ = std::chrono::steady_clock::now() + self->opts_->tick_period;
      self->arm_timer();
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close();
        return;
      }
      self->on_text(beast::buffers_to_string(self->buffer_.data()));
      self->buffer_.consume(self->buffer_.size());
      self->read();
    });
  }

  void on_text(std::string text) {
    if (!session_) {
      // The first message names the session; later ones must repeat the sid.
      std::string sid;
      try {
        const auto j = nlohmann::json::parse(text);
        if (j.is_object() && j.contains("sid") && j["sid"].is_string()) sid = j["sid"].get<std::string>();
      } catch (const nlohmann::json::exception&) {
      }
      if (sid.empty()) {
        send({{"type", "error"}, {"sid", ""}, {"code", "BadSchema"}, {"message", "first message must carry a sid"}});
        return;
      }
      session_ = std::make_unique<Session>(sid, opts_->session);
      if (opts_->log) opts_->log("session " + sid + " opened");
    }
    session_->enqueue(std::move(text));
  }

  void arm_timer() {
    timer_.expires_at(deadline_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->deadline_ += self->opts_->tick_period;
      self->on_tick();
      if (!self->closed_) self->arm_timer();
    });
  }

  void on_tick() {
    if (!session_) return;
    try {
      for (auto& m : session_->tick()) send(m);
    } catch (const SessionExpired&) {
      if (opts_->log) opts_->log("session " + session_->id() + " finished");
      closing_ = true;
      flush();
    }
  }

  void send(const nlohmann::json& m) {
    outbox_.push_back(m.dump());
    if (outbox_.size() == 1) flush();
  }

  void flush() {
    if (closed_) return;
    if (outbox_.empty()) {
      if (closing_) {
        closed_ = true;
        timer_.cancel();
        ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
      }
      return;
    }
    if (writing_) return;
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->writing_ = false;
      if (ec) {
        self->close();
        return;
      }
      self->outbox_.pop_front();
      self->flush();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    timer_.cancel();
    if (session_ && opts_->log) opts_->log("session " + session_->id() + " disconnected");
  }

  websocket::stream<beast::tcp_stream> ws_;
  net::steady_timer timer_;
  std::shared_ptr<const ServerOptions> opts_;
  beast::flat_buffer buffer_;
  std::unique_ptr<Session> session_;
  std::chrono::steady_clock::time_point deadline_;
  std::deque<std::string> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, std::shared_ptr<const ServerOptions> opts)
      : stream_(std::move(socket)), opts_(std::move(opts)) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->route();
    });
  }

 private:
  void route() {
    if (websocket::is_upgrade(req_)) {
      if (req_.target() != "/session") {
        respond(http::status::not_found, "text/plain", "websocket endpoint is /session\n");
        return;
      }
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket(), opts_)->start(std::move(req_));
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      respond(http::status::method_not_allowed, "text/plain", "GET only\n");
      return;
    }
    std::string target(req_.target());
    target = target.substr(0, target.find('?'));
    if (target.empty() || target.back() == '/') target += "index.html";
    if (opts_->static_root.empty() || target.find("..") != std::string::npos) {
      respond(http::status::not_found, "text/plain", "not found\n");
      return;
    }
    const std::filesystem::path file = opts_->static_root / target.substr(1);
    std::ifstream in(file, std::ios::binary);
    if (!in) {
      respond(http::status::not_found, "text/plain", "not found\n");
      return;
    }
    std::ostringstream body;
    body << in.rdbuf();
    respond(http::status::ok, mime_type(file), body.str());
  }

  void respond(http::status status, const std::string& type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, type);
    res->keep_alive(false);
    if (req_.method() != http::verb::head) res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  std::shared_ptr<const ServerOptions> opts_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

/// Accepts connections on `port` (0 picks a free port; see port()).
class Server {
 public:
  Server(net::io_context& ioc, unsigned short port, ServerOptions opts)
      : acceptor_(ioc), opts_(std::make_shared<const ServerOptions>(std::move(opts))) {
    const tcp::endpoint ep(net::ip::make_address("0.0.0.0"), port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() { accept(); }
  void stop() {
    beast::error_code ignored;
    acceptor_.close(ignored);
  }

 private:
  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpConnection>(std::move(socket), opts_)->start();
      accept();
    });
  }

  tcp::acceptor acceptor_;
  std::shared_ptr<const ServerOptions> opts_;
};

}  // namespace avr::live
