#include "choose4/http_server.hpp"

#include <httplib.h>

namespace choose4 {

struct HttpServer::Impl {
  Service service;
  httplib::Server server;

  explicit Impl(Service s) : service(std::move(s)) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const ServiceResponse r = service.handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), r.problem() ? "application/problem+json" : "application/json");
    };
    for (const char* path : {"/healthz", "/v1/strategies"}) server.Get(path, forward);
    for (const char* path : {"/v1/solve", "/v1/plan/evaluate", "/v1/curve", "/v1/simulate"}) {
      server.Post(path, forward);
    }
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      const ServiceResponse r = service.handle(req.method, req.path, req.body);
      if (r.problem()) res.set_content(r.body.dump(), "application/problem+json");
    });
  }
};

HttpServer::HttpServer(Service service) : impl_(std::make_unique<Impl>(std::move(service))) {}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::mount_static(const std::string& dir) { return impl_->server.set_mount_point("/", dir); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace choose4
