#pragma once

#include <memory>
#include <string>

#include "dosm/service.hpp"

namespace dosm::http {

// HTTP + JSON front end for DosmService. Errors come back as non-2xx with an ApiError body
// `{"code", "message", "details"?}`.
class HttpServer {
public:
  explicit HttpServer(service::DosmService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);

  /// Serves until stop() is called. Requires a prior successful bind().
  bool listen();

  void stop();
  [[nodiscard]] bool running() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status used for an error code.
int status_for(ErrorCode code) noexcept;

}  // namespace dosm::http
