// Copyright 2026 The clickloop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// HTTP + WebSocket front end for Service, on Boost.Beast. Socket I/O runs on
// an io_context; request handling (forward passes) runs on a separate worker
// pool so a slow session never stalls the others.

#pragma once

#include <chrono>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/thread_pool.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "clickloop/service.hpp"

namespace clickloop {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  int io_threads = 1;
  int worker_threads = 4;
  std::size_t max_body_bytes = 64U << 20U;
  std::chrono::seconds eviction_interval{60};
};

namespace server_detail {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

/// Session id from "/sessions/{id}/events", if the target has that form.
inline std::optional<std::string> events_session(std::string_view target) {
  target = target.substr(0, target.find('?'));
  constexpr std::string_view kPrefix = "/sessions/";
  constexpr std::string_view kSuffix = "/events";
  if (target.size() <= kPrefix.size() + kSuffix.size()) return std::nullopt;
  if (target.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  if (target.substr(target.size() - kSuffix.size()) != kSuffix) return std::nullopt;
  std::string id(target.substr(kPrefix.size(), target.size() - kPrefix.size() - kSuffix.size()));
  if (id.find('/') != std::string::npos) return std::nullopt;
  return id;
}

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, Service& svc) : ws_(std::move(socket)), svc_(svc) {}

  void run(http::request<http::string_body> req, std::string id) {
    id_ = std::move(id);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsConnection> weak = shared_from_this();
    auto exec = ws_.get_executor();
    token_ = svc_.subscribe(id_, [weak, exec](const std::string& msg) {
      net::post(exec, [weak, msg] {
        if (auto self = weak.lock()) self->enqueue(msg);
      });
    });
    if (!token_) {
      ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
      return;
    }
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (token_) svc_.unsubscribe(id_, *token_);
      token_.reset();
      return;
    }
    buffer_.consume(buffer_.size());  // client messages carry no meaning
    do_read();
  }

  void enqueue(const std::string& msg) {
    queue_.push_back(msg);
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
  Service& svc_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  std::string id_;
  std::optional<std::uint64_t> token_;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, Service& svc, net::thread_pool& workers, std::size_t max_body)
      : stream_(std::move(socket)), svc_(svc), workers_(workers), max_body_(max_body) {}

  void run() { net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpConnection::do_read, shared_from_this())); }

 private:
  void do_read() {
    parser_.emplace();
    parser_->body_limit(max_body_);
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return close();
    if (ec == http::error::body_limit) {
      keep_alive_ = false;
      return send(parser_->get().version(), detail::error_response(413, "request body exceeds " + std::to_string(max_body_) + " bytes"));
    }
    if (ec) return;
    auto req = parser_->release();
    keep_alive_ = req.keep_alive();
    const unsigned version = req.version();

    if (websocket::is_upgrade(req)) {
      auto id = events_session(std::string_view(req.target().data(), req.target().size()));
      if (!id) return send(version, detail::error_response(404, "no such event stream"));
      if (!svc_.has_session(*id)) return send(version, detail::error_response(404, "unknown session " + *id));
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket(), svc_)->run(std::move(req), std::move(*id));
      return;
    }
    if (req.method() == http::verb::options) {
      ApiResponse r{204, "text/plain", ""};
      return send(version, r);
    }
    net::post(workers_, [self = shared_from_this(), req = std::move(req), version] {
      ApiResponse r = self->svc_.handle(std::string(req.method_string()), std::string(req.target()), req.body());
      net::post(self->stream_.get_executor(), [self, r = std::move(r), version] { self->send(version, r); });
    });
  }

  void send(unsigned version, const ApiResponse& r) {
    auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status), version);
    res->set(http::field::server, "clickloop");
    res->set(http::field::content_type, r.content_type);
    res->set(http::field::access_control_allow_origin, "*");
    res->set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
    res->set(http::field::access_control_allow_headers, "Content-Type");
    res->keep_alive(keep_alive_);
    res->body() = r.body;
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!self->keep_alive_) return self->close();
      self->do_read();
    });
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  Service& svc_;
  net::thread_pool& workers_;
  std::size_t max_body_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  bool keep_alive_ = true;
};

}  // namespace server_detail

class Server {
 public:
  Server(Service& svc, ServerOptions opts)
      : svc_(svc),
        opts_(std::move(opts)),
        ioc_(std::max(1, opts_.io_threads)),
        workers_(static_cast<std::size_t>(std::max(1, opts_.worker_threads))),
        acceptor_(server_detail::net::make_strand(ioc_)),
        evict_timer_(ioc_) {}

  ~Server() { stop(); }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving on background threads.
  void start() {
    namespace net = server_detail::net;
    using server_detail::tcp;
    const tcp::endpoint ep(net::ip::make_address(opts_.address), opts_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen(net::socket_base::max_listen_connections);
    port_ = acceptor_.local_endpoint().port();
    do_accept();
    arm_eviction();
    for (int i = 0; i < std::max(1, opts_.io_threads); ++i) threads_.emplace_back([this] { ioc_.run(); });
    spdlog::info("listening on {}:{}", opts_.address, port_);
  }

  unsigned short port() const { return port_; }

  /// Makes SIGINT/SIGTERM end wait().
  void stop_on_signals() {
    signals_.emplace(ioc_, SIGINT, SIGTERM);
    signals_->async_wait([this](server_detail::beast::error_code, int) { ioc_.stop(); });
  }

  void stop() {
    if (stopped_) return;
    stopped_ = true;
    ioc_.stop();
    for (auto& t : threads_) t.join();
    threads_.clear();
    workers_.join();
  }

  /// Blocks until stop() is called from another thread.
  void wait() {
    for (auto& t : threads_) t.join();
    threads_.clear();
  }

 private:
  void do_accept() {
    acceptor_.async_accept(server_detail::net::make_strand(ioc_),
                           [this](server_detail::beast::error_code ec, server_detail::tcp::socket socket) {
                             if (!ec) {
                               std::make_shared<server_detail::HttpConnection>(std::move(socket), svc_, workers_,
                                                                               opts_.max_body_bytes)
                                   ->run();
                             }
                             if (acceptor_.is_open()) do_accept();
                           });
  }

  void arm_eviction() {
    evict_timer_.expires_after(opts_.eviction_interval);
    evict_timer_.async_wait([this](server_detail::beast::error_code ec) {
      if (ec) return;
      server_detail::net::post(workers_, [this] { svc_.evict_idle(); });
      arm_eviction();
    });
  }

  Service& svc_;
  ServerOptions opts_;
  server_detail::net::io_context ioc_;
  server_detail::net::thread_pool workers_;
  server_detail::tcp::acceptor acceptor_;
  server_detail::net::steady_timer evict_timer_;
  std::optional<server_detail::net::signal_set> signals_;
  std::vector<std::thread> threads_;
  unsigned short port_ = 0;
  bool stopped_ = false;
};

}  // namespace clickloop
