// choose4_serve [--listen host:port] [--static dir] [--max-replicates N]
// The listen address falls back to $CHOOSE4_LISTEN, then 127.0.0.1:8080.

#include <csignal>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "choose4/http_server.hpp"

namespace {
choose4::HttpServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"choose4 HTTP service"};
  const char* env = std::getenv("CHOOSE4_LISTEN");
  std::string listen = env && *env ? env : "127.0.0.1:8080";
  std::string static_dir;
  choose4::ServiceLimits limits;
  app.add_option("--listen", listen, "host:port");
  app.add_option("--static", static_dir, "directory of UI assets served at /");
  app.add_option("--max-replicates", limits.max_replicates, "per-request simulation cap");
  CLI11_PARSE(app, argc, argv);

  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "--listen must be host:port\n";
    return 2;
  }
  const std::string host = listen.substr(0, colon);
  const int port = std::atoi(listen.c_str() + colon + 1);

  choose4::HttpServer server{choose4::Service(limits)};
  if (!static_dir.empty() && !server.mount_static(static_dir)) {
    std::cerr << "cannot serve " << static_dir << "\n";
    return 2;
  }
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << listen << "\n";
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << host << ":" << bound << "\n";
  return server.listen() ? 0 : 1;
}
