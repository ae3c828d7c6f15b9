#include "choose4/service.hpp"

#include <functional>

#include "choose4/document.hpp"
#include "choose4/report.hpp"

namespace choose4 {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Infeasible: return 422;
    case ErrorCode::LimitExceeded: return 413;
    case ErrorCode::CholeskyFailure:
    case ErrorCode::MonotoneLikelihood: return 500;
    default: return 400;
  }
}

ServiceResponse problem(int status, std::string_view code, std::string_view detail) {
  const char* title = status == 413 ? "Request too large"
                      : status == 422 ? "Infeasible design"
                      : status == 404 ? "Not found"
                      : status == 405 ? "Method not allowed"
                      : status >= 500 ? "Numerical failure"
                                      : "Invalid request";
  return {status, json{{"type", "about:blank"},
                       {"title", title},
                       {"status", status},
                       {"code", std::string(code)},
                       {"detail", std::string(detail)},
                       {"engine_version", std::string(engine_version())}}};
}

namespace {

// Runs `body` through the strict config parser as `command`, under `block`
// (or spliced at top level when block is empty), and returns the result
// merged with the audit fields.
ServiceResponse run_command(const json& body, Command command, std::string_view block,
                            const ServiceLimits& limits,
                            const std::function<void(const RunConfig&)>& precheck = {}) {
  if (!body.is_object()) return problem(400, "ConfigError", "request body must be a JSON object");
  try {
    json cfg_doc = {{"schema", std::string(kConfigSchema)}, {"command", std::string(to_string(command))}};
    if (block.empty()) {
      for (const auto& [k, v] : body.items()) cfg_doc[k] = v;
    } else {
      cfg_doc[std::string(block)] = body;
    }
    RunConfig cfg = parse_config(cfg_doc);
    if (precheck) precheck(cfg);
    if (command == Command::Ocs || command == Command::Simulate) {
      if (!cfg.evaluation) cfg.evaluation = EvaluationBlock{};
      if (!cfg.evaluation->integration.time_budget) cfg.evaluation->integration.time_budget = limits.time_budget;
    }
    json response = execute(cfg).at("result");
    response["request"] = body;
    response["request_hash"] = fingerprint(body);
    response["engine_version"] = std::string(engine_version());
    return {200, std::move(response)};
  } catch (const Error& e) {
    return problem(http_status(e.code()), to_string(e.code()), e.what());
  }
}

json pattern_json(const std::optional<ParamSet>& unknowns) {
  if (!unknowns) return nullptr;
  json inputs = json::array(), solved = json::array();
  for (Param p : unknowns->complement().members()) inputs.push_back(std::string(param_name(p)));
  for (Param p : unknowns->members()) solved.push_back(std::string(param_name(p)));
  return {{"inputs", inputs}, {"unknowns", solved}};
}

}  // namespace

ServiceResponse Service::solve(const json& body) const {
  return run_command(body, Command::Solve, "solve", limits_);
}

ServiceResponse Service::evaluate_plan(const json& body) const {
  return run_command(body, Command::Ocs, "", limits_);
}

ServiceResponse Service::strategies() const {
  json list = json::array();
  for (const auto& t : strategy_templates()) {
    list.push_back({{"name", std::string(to_string(t.strategy))},
                    {"title", t.title},
                    {"summary", t.summary},
                    {"interim", pattern_json(t.interim_unknowns)},
                    {"final", pattern_json(t.final_unknowns)}});
  }
  json patterns = json::array();
  for (const auto& p : enumerate_patterns()) {
    json unknowns = json::array();
    for (Param q : p.unknowns.members()) unknowns.push_back(std::string(param_name(q)));
    patterns.push_back({{"unknowns", unknowns}, {"route", std::string(to_string(p.route))}});
  }
  return {200, {{"strategies", list}, {"patterns", patterns}, {"engine_version", std::string(engine_version())}}};
}

ServiceResponse Service::curve(const json& body) const {
  return run_command(body, Command::Figure1, "figure1", limits_);
}

ServiceResponse Service::simulate(const json& body) const {
  const int cap = limits_.max_replicates;
  return run_command(body, Command::Simulate, "", limits_, [cap](const RunConfig& cfg) {
    if (cfg.simulate && cfg.simulate->replicates > cap) {
      fail(ErrorCode::LimitExceeded, "simulate.replicates: " + std::to_string(cfg.simulate->replicates) +
                                         " exceeds the per-request cap of " + std::to_string(cap));
    }
    if (cfg.simulate && cfg.simulate->raw_output) {
      fail(ErrorCode::ConfigError, "simulate.raw_output: not available over HTTP");
    }
  });
}

ServiceResponse Service::health() const {
  return {200, {{"status", "ok"}, {"engine_version", std::string(engine_version())}}};
}

ServiceResponse Service::handle(std::string_view method, std::string_view path, std::string_view body) const {
  const bool get = method == "GET";
  const bool post = method == "POST";
  if (path == "/healthz") return get ? health() : problem(405, "MethodNotAllowed", "use GET");
  if (path == "/v1/strategies") return get ? strategies() : problem(405, "MethodNotAllowed", "use GET");

  using Handler = ServiceResponse (Service::*)(const json&) const;
  Handler handler = nullptr;
  if (path == "/v1/solve") handler = &Service::solve;
  else if (path == "/v1/plan/evaluate") handler = &Service::evaluate_plan;
  else if (path == "/v1/curve") handler = &Service::curve;
  else if (path == "/v1/simulate") handler = &Service::simulate;
  if (!handler) return problem(404, "NotFound", "no endpoint " + std::string(path));
  if (!post) return problem(405, "MethodNotAllowed", "use POST");

  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) return problem(400, "ConfigError", "request body is not valid JSON");
  return (this->*handler)(parsed);
}

}  // namespace choose4
