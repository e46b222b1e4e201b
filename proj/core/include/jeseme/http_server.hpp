#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "jeseme/service.hpp"

namespace jeseme::service {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;
};

// GET-only HTTP binding of Api::handle with permissive CORS.
class HttpServer {
 public:
  HttpServer(std::shared_ptr<const Api> api, ServerConfig config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds the socket and returns the bound port. Throws Error(kIoError).
  int bind();
  // Blocks until stop(). Binds first if needed.
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace jeseme::service
