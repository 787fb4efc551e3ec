#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "rainbow/service.hpp"

namespace rainbow {

/// WebSocket front end: one Connection per socket, a frame timer per
/// connection, all on one I/O thread so connections never run concurrently.
class Server {
public:
  /// Binds immediately; port 0 picks a free port. Throws std::runtime_error
  /// if the port is taken.
  Server(ServiceContext& ctx, std::uint16_t port, const std::string& address = "127.0.0.1");
  ~Server();

  std::uint16_t port() const;
  /// Blocks until stop() is called.
  void run();
  /// Safe to call from any thread.
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rainbow
