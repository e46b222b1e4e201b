#include "jeseme/http_server.hpp"

#include "httplib.h"
#include "jeseme/error.hpp"

namespace jeseme::service {

struct HttpServer::Impl {
  std::shared_ptr<const Api> api;
  ServerConfig config;
  httplib::Server server;
  int port = -1;
};

HttpServer::HttpServer(std::shared_ptr<const Api> api, ServerConfig config) : impl_(std::make_unique<Impl>()) {
  if (!api) throw Error(ErrorCode::kInvalidArgument, "HttpServer needs an Api");
  impl_->api = std::move(api);
  impl_->config = std::move(config);

  auto& server = impl_->server;
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  const Api* handler = impl_->api.get();
  server.Get(R"(/api/.*)", [handler](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [key, value] : req.params) params.emplace(key, value);
    const auto result = handler->handle(req.path, params);
    res.status = result.status;
    res.set_content(result.body, "application/json; charset=utf-8");
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  if (impl_->config.static_dir) {
    if (!server.set_mount_point("/", impl_->config.static_dir->string())) {
      throw Error(ErrorCode::kIoError, "static directory not found", impl_->config.static_dir->string());
    }
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (impl_->port >= 0) return impl_->port;
  const auto& c = impl_->config;
  const int port = c.port == 0 ? impl_->server.bind_to_any_port(c.host) : (impl_->server.bind_to_port(c.host, c.port) ? c.port : -1);
  if (port < 0) {
    throw Error(ErrorCode::kIoError, "cannot bind " + c.host + ":" + std::to_string(c.port), c.host);
  }
  impl_->port = port;
  return port;
}

void HttpServer::run() {
  bind();
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace jeseme::service
