#pragma once

#include <memory>
#include <optional>
#include <string>

#include "choose4/service.hpp"

namespace choose4 {

class HttpServer {
 public:
  explicit HttpServer(Service service = Service{});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Serves files under `dir` at "/" (the companion UI build).
  bool mount_static(const std::string& dir);

  // Port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace choose4
