#pragma once

#include <memory>
#include <string>

#include "cril/session.hpp"

namespace cril {

/// Serves one DebugSession over HTTP. The routes are the /api/* paths of
/// DebugSession::handle.
class DebugServer {
 public:
  explicit DebugServer(DebugSession& session);
  ~DebugServer();

  /// Binds host:port (port 0 picks a free one) and returns the port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cril
