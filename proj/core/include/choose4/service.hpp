#pragma once

// Stateless request handlers behind the HTTP facade. Each handler takes the
// parsed request body and returns a status code plus a JSON body; nothing is
// kept between calls.

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "choose4/error.hpp"

namespace choose4 {

struct ServiceLimits {
  int max_replicates = 100000;
  // Applied to integrations that do not set their own budget.
  std::optional<std::chrono::milliseconds> time_budget = std::chrono::milliseconds(30000);
};

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
  bool problem() const noexcept { return status >= 400; }
};

int http_status(ErrorCode code) noexcept;

// RFC 7807 style: {type, title, status, code, detail}.
ServiceResponse problem(int status, std::string_view code, std::string_view detail);

class Service {
 public:
  explicit Service(ServiceLimits limits = {}) : limits_(limits) {}

  ServiceResponse solve(const nlohmann::json& body) const;
  ServiceResponse evaluate_plan(const nlohmann::json& body) const;
  ServiceResponse strategies() const;
  ServiceResponse curve(const nlohmann::json& body) const;
  ServiceResponse simulate(const nlohmann::json& body) const;
  ServiceResponse health() const;

  // Routing on method and path with a raw body; used by the HTTP layer.
  ServiceResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

  const ServiceLimits& limits() const noexcept { return limits_; }

 private:
  ServiceLimits limits_;
};

}  // namespace choose4
