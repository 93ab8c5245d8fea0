#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sir/error.hpp"
#include "sir/service.hpp"

namespace sir {

struct ApiOptions {
  std::vector<std::string> cors_origins;
  std::string admin_token;  // empty disables the /v1/admin routes
  std::size_t worker_threads = 32;
};

/// HTTP front end for a Service. All routes live under /v1.
class ApiServer {
 public:
  ApiServer(Service& service, ApiOptions opts);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port;
  /// the bound port is returned.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status used for a library error code.
int http_status(Errc code);

}  // namespace sir
