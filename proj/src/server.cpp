#include "rainbow/server.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace rainbow {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
  WsSession(tcp::socket socket, ServiceContext& ctx)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), conn_(ctx), t0_(std::chrono::steady_clock::now()) {
    const double fps = ctx.session_config().frame_rate;
    period_ = std::chrono::microseconds(std::llround(1e6 / (fps > 0.0 ? fps : 30.0)));
  }

  void start() {
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->send(self->conn_.open(self->now()));
      self->read();
      self->schedule_tick();
    });
  }

  void shutdown() {
    if (closed_) return;
    closed_ = true;
    conn_.close(now());
    timer_.cancel();
    beast::error_code ec;
    ws_.next_layer().close(ec);
  }

private:
  Millis now() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0_).count();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->shutdown();
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->send(self->conn_.receive(text, self->now()));
      self->read();
    });
  }

  void schedule_tick() {
    timer_.expires_after(period_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->send(self->conn_.tick(self->now()));
      self->schedule_tick();
    });
  }

  void send(const std::vector<Message>& messages) {
    if (closed_) return;
    for (const auto& m : messages) queue_.push_back(encode(m) + "\n");
    if (!writing_) write();
  }

  void write() {
    if (queue_.empty() || closed_) {
      writing_ = false;
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->writing_ = false;
        self->shutdown();
        return;
      }
      self->queue_.pop_front();
      self->write();
    });
  }

  websocket::stream<tcp::socket> ws_;
  asio::steady_timer timer_;
  Connection conn_;
  std::chrono::steady_clock::time_point t0_;
  std::chrono::microseconds period_{33333};
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool writing_ = false;
  bool closed_ = false;
};

}  // namespace

struct Server::Impl {
  Impl(ServiceContext& c) : ctx(c), acceptor(ioc) {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      auto s = std::make_shared<WsSession>(std::move(socket), ctx);
      sessions.push_back(s);
      s->start();
      accept();
    });
  }

  ServiceContext& ctx;
  asio::io_context ioc{1};
  tcp::acceptor acceptor;
  std::vector<std::weak_ptr<WsSession>> sessions;
};

Server::Server(ServiceContext& ctx, std::uint16_t port, const std::string& address)
    : impl_(std::make_unique<Impl>(ctx)) {
  beast::error_code ec;
  tcp::endpoint ep(asio::ip::make_address(address, ec), port);
  if (ec) throw std::runtime_error("bad address '" + address + "': " + ec.message());
  auto& acc = impl_->acceptor;
  acc.open(ep.protocol(), ec);
  if (!ec) acc.set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) acc.bind(ep, ec);
  if (!ec) acc.listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw std::runtime_error("cannot listen on " + address + ":" + std::to_string(port) + ": " + ec.message());
  impl_->accept();
}

Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() { impl_->ioc.run(); }

void Server::stop() {
  asio::post(impl_->ioc, [impl = impl_.get()] {
    beast::error_code ec;
    impl->acceptor.close(ec);
    for (auto& w : impl->sessions) {
      if (auto s = w.lock()) s->shutdown();
    }
    impl->ioc.stop();
  });
}

}  // namespace rainbow
