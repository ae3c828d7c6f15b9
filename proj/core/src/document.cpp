#include "choose4/document.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

#include "choose4/error.hpp"

namespace choose4 {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(std::string_view path, const std::string& what) {
  fail(ErrorCode::ConfigError, std::string(path) + ": " + what);
}

std::string join(std::string_view path, std::string_view key) {
  return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

// Strict view over one JSON object: every key must be declared up front.
class Fields {
 public:
  Fields(const json& obj, std::string_view path, std::initializer_list<std::string_view> allowed)
      : obj_(obj), path_(path) {
    if (!obj.is_object()) config_error(path, "expected an object");
    const std::set<std::string_view> ok(allowed);
    for (const auto& [key, _] : obj.items()) {
      if (!ok.contains(key)) config_error(join(path, key), "unknown field");
    }
  }

  bool has(std::string_view key) const { return obj_.contains(key); }
  const json& at(std::string_view key) const {
    if (!has(key)) config_error(join(path_, key), "required field missing");
    return obj_.at(std::string(key));
  }
  std::string path(std::string_view key) const { return join(path_, key); }

  double number(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number()) config_error(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(path(key), "expected a finite number");
    return d;
  }
  double number_or(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> optional_number(std::string_view key) const {
    if (!has(key) || at(key).is_null()) return std::nullopt;
    return number(key);
  }
  std::int64_t integer(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) config_error(path(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      if (!v.is_number_unsigned()) config_error(path(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::string text(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_string()) config_error(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string text_or(std::string_view key, std::string fallback) const {
    return has(key) ? text(key) : fallback;
  }
  bool boolean_or(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) config_error(path(key), "expected true or false");
    return v.get<bool>();
  }

 private:
  const json& obj_;
  std::string path_;
};

RoundingPolicy parse_rounding(const Fields& f) {
  if (!f.has("rounding")) return RoundingPolicy::Exact;
  const auto name = f.text("rounding");
  const auto r = rounding_from_name(name);
  if (!r) config_error(f.path("rounding"), "expected exact | ceil-integer | nearest-integer");
  return *r;
}

PiecewiseConstant parse_piecewise(const json& arr, std::string_view path) {
  if (!arr.is_array() || arr.empty()) config_error(path, "expected a non-empty array of segments");
  std::vector<double> starts, values;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = std::string(path) + "[" + std::to_string(i) + "]";
    Fields f(arr[i], p, {"start", "value"});
    starts.push_back(f.number("start"));
    values.push_back(f.number("value"));
  }
  try {
    return PiecewiseConstant(std::move(starts), std::move(values));
  } catch (const Error& e) {
    config_error(path, e.what());
  }
}

json piecewise_to_json(const PiecewiseConstant& pc) {
  json arr = json::array();
  for (std::size_t i = 0; i < pc.values().size(); ++i) {
    arr.push_back({{"start", pc.starts()[i]}, {"value", pc.values()[i]}});
  }
  return arr;
}

json param_set_to_json(ParamSet s) {
  json arr = json::array();
  for (Param p : s.members()) arr.push_back(std::string(param_name(p)));
  return arr;
}

}  // namespace

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::Plan: return "plan";
    case Command::Ocs: return "ocs";
    case Command::Simulate: return "simulate";
    case Command::Figure1: return "figure1";
  }
  return "?";
}

std::optional<Command> command_from_name(std::string_view name) noexcept {
  for (auto c : {Command::Solve, Command::Plan, Command::Ocs, Command::Simulate, Command::Figure1}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(OutputFormat f) noexcept {
  switch (f) {
    case OutputFormat::Markdown: return "markdown";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Doc: return "doc";
  }
  return "?";
}

std::optional<OutputFormat> format_from_name(std::string_view name) noexcept {
  for (auto f : {OutputFormat::Markdown, OutputFormat::Csv, OutputFormat::Doc}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

ChosenValues parse_inputs(const json& obj, std::string_view path, int expected) {
  if (!obj.is_object()) config_error(path, "expected an object of named parameter values");
  ChosenValues values;
  for (const auto& [key, v] : obj.items()) {
    const auto p = param_from_name(key);
    if (!p) {
      config_error(join(path, key), "unknown parameter (expected theta0, theta1, d, theta_star, alpha, beta)");
    }
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      config_error(join(path, key), "expected a finite number");
    }
    values.set(*p, v.get<double>());
  }
  if (values.count() != expected) {
    fail(ErrorCode::Arity, std::string(path) + ": exactly " + std::to_string(expected) +
                               " parameter values must be given, got " +
                               std::to_string(values.count()));
  }
  return values;
}

json inputs_to_json(const ChosenValues& values) {
  json out = json::object();
  for (Param p : kAllParams) {
    if (auto v = values.get(p)) out[std::string(param_name(p))] = *v;
  }
  return out;
}

PlanBlock parse_plan_block(const json& obj, std::string_view path) {
  Fields f(obj, path, {"schema", "strategy", "pi", "rounding", "stages", "observed_deaths"});
  if (f.has("schema") && f.text("schema") != kPlanSchema) {
    config_error(f.path("schema"), "expected \"" + std::string(kPlanSchema) + "\"");
  }
  PlanBlock block;
  const auto strategy = strategy_from_name(f.text_or("strategy", "Custom"));
  if (!strategy) {
    config_error(f.path("strategy"),
                 "expected Fleming | Rodriguez | StandardCI | DiscreteThreshold | FdaT2D | Custom");
  }
  block.strategy = *strategy;
  block.pi = f.number_or("pi", kDefaultAllocation);
  block.rounding = parse_rounding(f);
  const json& stages = f.at("stages");
  if (!stages.is_array() || stages.empty()) config_error(f.path("stages"), "expected a non-empty array");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string p = f.path("stages") + "[" + std::to_string(i) + "]";
    // resolved/solve_route/warnings/planned_d appear in emitted plan
    // documents and are ignored on input.
    Fields sf(stages[i], p, {"label", "inputs", "resolved", "solve_route", "warnings", "planned_d", "chosen"});
    ChoiceSpec c;
    c.stage_label = sf.text_or("label", "stage" + std::to_string(i + 1));
    c.values = parse_inputs(sf.at("inputs"), sf.path("inputs"));
    block.stages.push_back(std::move(c));
  }
  if (f.has("observed_deaths")) {
    const json& obs = f.at("observed_deaths");
    if (!obs.is_object()) config_error(f.path("observed_deaths"), "expected {label: deaths}");
    for (const auto& [label, v] : obs.items()) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) {
        config_error(join(f.path("observed_deaths"), label), "expected a positive number");
      }
      block.observed_deaths[label] = v.get<double>();
    }
  }
  return block;
}

IntegrationSettings parse_integration(const json& obj, std::string_view path) {
  Fields f(obj, path, {"samples", "batches", "method", "threads", "time_budget_ms"});
  IntegrationSettings s;
  if (f.has("samples")) s.samples = f.unsigned_integer("samples");
  if (f.has("batches")) s.batches = static_cast<unsigned>(f.unsigned_integer("batches"));
  if (f.has("threads")) s.threads = static_cast<unsigned>(f.unsigned_integer("threads"));
  if (f.has("time_budget_ms")) {
    s.time_budget = std::chrono::milliseconds(static_cast<std::int64_t>(f.unsigned_integer("time_budget_ms")));
  }
  if (f.has("method")) {
    const auto m = f.text("method");
    if (m == "qmc") s.method = IntegrationMethod::Qmc;
    else if (m == "mc") s.method = IntegrationMethod::MonteCarlo;
    else config_error(f.path("method"), "expected qmc | mc");
  }
  try {
    validate(s);
  } catch (const Error& e) {
    config_error(path, e.what());
  }
  return s;
}

EvaluationBlock parse_evaluation_block(const json& obj, std::string_view path) {
  Fields f(obj, path, {"h0_hr", "h1_hr", "fwer", "first_crossing", "modes", "integration"});
  EvaluationBlock e;
  e.h0_hr = f.optional_number("h0_hr");
  e.h1_hr = f.optional_number("h1_hr");
  e.fwer = f.boolean_or("fwer", false);
  e.first_crossing = f.boolean_or("first_crossing", false);
  // "modes" names joint modes instead of flags; all-met is always reported.
  if (f.has("modes")) {
    const json& modes = f.at("modes");
    if (!modes.is_array()) config_error(f.path("modes"), "expected an array of mode names");
    for (const auto& m : modes) {
      const auto mode = m.is_string() ? joint_mode_from_name(m.get<std::string>()) : std::nullopt;
      if (!mode) {
        config_error(f.path("modes"), "expected all-met | at-least-one-met | per-stage-first-crossing");
      }
      if (*mode == JointMode::AtLeastOneMet) e.fwer = true;
      if (*mode == JointMode::PerStageFirstCrossing) e.first_crossing = true;
    }
  }
  if (f.has("integration")) e.integration = parse_integration(f.at("integration"), f.path("integration"));
  return e;
}

TrialScenario parse_scenario(const json& obj, std::string_view path) {
  Fields f(obj, path, {"n", "pi", "accrual", "control_hazard", "hazard_ratio", "censor_rate", "seed"});
  TrialScenario s;
  s.n = static_cast<int>(f.integer("n"));
  s.pi = f.number_or("pi", kDefaultAllocation);
  s.accrual_duration = f.number_or("accrual", 0.0);
  s.control_hazard = parse_piecewise(f.at("control_hazard"), f.path("control_hazard"));
  s.hazard_ratio = f.has("hazard_ratio") ? parse_piecewise(f.at("hazard_ratio"), f.path("hazard_ratio"))
                                         : PiecewiseConstant::constant(1.0);
  s.censor_rate = f.number_or("censor_rate", 0.0);
  if (f.has("seed")) s.seed = f.unsigned_integer("seed");
  try {
    validate(s);
  } catch (const Error& e) {
    config_error(path, e.what());
  }
  return s;
}

SolveBlock parse_solve_block(const json& obj, std::string_view path) {
  Fields f(obj, path, {"inputs", "pi", "rounding"});
  SolveBlock b;
  b.inputs = parse_inputs(f.at("inputs"), f.path("inputs"));
  b.pi = f.number_or("pi", kDefaultAllocation);
  b.rounding = parse_rounding(f);
  return b;
}

SimulateBlock parse_simulate_block(const json& obj, std::string_view path) {
  Fields f(obj, path, {"replicates", "raw_output", "threads"});
  SimulateBlock b;
  if (f.has("replicates")) b.replicates = static_cast<int>(f.integer("replicates"));
  if (f.has("raw_output")) b.raw_output = f.text("raw_output");
  if (f.has("threads")) b.threads = static_cast<unsigned>(f.unsigned_integer("threads"));
  if (b.replicates < 2) config_error(f.path("replicates"), "need at least 2 replicates");
  return b;
}

Figure1Block parse_figure1_block(const json& obj, std::string_view path) {
  Fields f(obj, path, {"inputs", "pi", "d_min", "d_max", "grid_step", "alpha_cap"});
  Figure1Block b;
  b.inputs = parse_inputs(f.at("inputs"), f.path("inputs"), 3);
  if (b.inputs.has(Param::Deaths)) config_error(f.path("inputs"), "d is swept and must not be given");
  b.pi = f.number_or("pi", kDefaultAllocation);
  if (f.has("d_min")) b.d_min = static_cast<int>(f.integer("d_min"));
  if (f.has("d_max")) b.d_max = static_cast<int>(f.integer("d_max"));
  b.grid_step = f.number_or("grid_step", 0.05);
  b.alpha_cap = f.optional_number("alpha_cap");
  if (b.d_min < 1 || b.d_max < b.d_min) config_error(path, "need 1 <= d_min <= d_max");
  if (b.d_max - b.d_min > 100000) config_error(path, "d range too wide");
  if (!(b.grid_step > 0.0)) config_error(f.path("grid_step"), "must be positive");
  return b;
}

RunConfig parse_config(const json& doc) {
  Fields f(doc, "", {"schema", "name", "description", "command", "seed", "output", "solve", "plan",
                     "evaluation", "scenario", "simulate", "figure1"});
  const auto schema = f.text("schema");
  if (schema != kConfigSchema) {
    config_error("schema", "unsupported schema \"" + schema + "\" (expected \"" + std::string(kConfigSchema) + "\")");
  }
  RunConfig cfg;
  cfg.source = doc;
  const auto command = command_from_name(f.text("command"));
  if (!command) config_error("command", "expected solve | plan | ocs | simulate | figure1");
  cfg.command = *command;
  cfg.name = f.text_or("name", "");
  cfg.description = f.text_or("description", "");
  if (f.has("seed")) cfg.seed = f.unsigned_integer("seed");
  if (f.has("output")) {
    Fields of(f.at("output"), "output", {"format"});
    if (of.has("format")) {
      const auto fmt = format_from_name(of.text("format"));
      if (!fmt) config_error("output.format", "expected markdown | csv | doc");
      cfg.format = *fmt;
    }
  }

  // Each command accepts exactly the blocks it uses.
  std::set<std::string_view> allowed;
  switch (cfg.command) {
    case Command::Solve: allowed = {"solve"}; break;
    case Command::Plan:
    case Command::Ocs: allowed = {"plan", "evaluation"}; break;
    case Command::Simulate: allowed = {"plan", "evaluation", "scenario", "simulate"}; break;
    case Command::Figure1: allowed = {"figure1"}; break;
  }
  for (std::string_view block : {"solve", "plan", "evaluation", "scenario", "simulate", "figure1"}) {
    if (f.has(block) && !allowed.contains(block)) {
      config_error(block, "not used by command '" + std::string(to_string(cfg.command)) + "'");
    }
  }

  switch (cfg.command) {
    case Command::Solve:
      cfg.solve = parse_solve_block(f.at("solve"));
      break;
    case Command::Plan:
    case Command::Ocs:
    case Command::Simulate: {
      cfg.plan = parse_plan_block(f.at("plan"));
      if (f.has("evaluation")) cfg.evaluation = parse_evaluation_block(f.at("evaluation"));
      if (cfg.command == Command::Simulate) {
        cfg.scenario = parse_scenario(f.at("scenario"));
        cfg.simulate = f.has("simulate") ? parse_simulate_block(f.at("simulate")) : SimulateBlock{};
      }
      break;
    }
    case Command::Figure1:
      cfg.figure1 = parse_figure1_block(f.at("figure1"));
      break;
  }
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, std::string("malformed document: ") + e.what());
  }
  return parse_config(doc);
}

MonitoringPlan build_plan(const PlanBlock& block) {
  MonitoringPlan plan = build_plan(block.strategy, block.stages, block.pi, block.rounding);
  if (!block.observed_deaths.empty()) plan = with_observed_deaths(plan, block.observed_deaths);
  return plan;
}

json to_json(const AnalysisSpec& s) {
  return {{"theta0", s.theta0}, {"theta1", s.theta1}, {"d", s.d},         {"theta_star", s.theta_star},
          {"alpha", s.alpha},   {"beta", s.beta},     {"power", s.power()}, {"pi", s.pi}};
}

json to_json(const Solution& sol) {
  json out;
  out["resolved"] = to_json(sol.spec);
  out["inputs"] = param_set_to_json(sol.pattern.inputs);
  out["unknowns"] = param_set_to_json(sol.pattern.unknowns);
  out["solve_route"] = std::string(to_string(sol.pattern.route));
  out["rounding"] = std::string(to_string(sol.rounding));
  if (sol.d_exact) out["d_exact"] = *sol.d_exact;
  if (!(sol.final_pattern.unknowns == sol.pattern.unknowns)) {
    out["final_unknowns"] = param_set_to_json(sol.final_pattern.unknowns);
  }
  out["warnings"] = sol.warnings;
  return out;
}

json to_json(const TaggedProbability& p) {
  json out{{"value", p.value}, {"source", std::string(to_string(p.source))}};
  if (p.source != ProbabilitySource::ClosedForm) out["std_error"] = p.std_error;
  return out;
}

json to_json(const JointProbResult& r) {
  json out = to_json(r.tagged());
  out["n_samples"] = r.n_samples;
  out["seed"] = r.seed;
  if (r.truncated) out["truncated"] = true;
  return out;
}

json to_json(const PlanTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row{{"label", r.label},
             {"d", r.d},
             {"theta0", r.theta0},
             {"theta1", r.theta1},
             {"theta_star", r.theta_star},
             {"alpha", to_json(r.alpha)},
             {"power", to_json(r.power)},
             {"chosen", param_set_to_json(r.chosen)},
             {"warnings", r.warnings}};
    if (r.planned_d) {
      row["planned_d"] = *r.planned_d;
      row["observed_minus_planned"] = r.d - *r.planned_d;
    }
    rows.push_back(std::move(row));
  }
  json overall = json::array();
  for (const auto& o : t.overall) {
    overall.push_back({{"label", o.label},
                       {"h0_hr", o.h0_hr},
                       {"h1_hr", o.h1_hr},
                       {"under_h0", to_json(o.under_h0)},
                       {"under_h1", to_json(o.under_h1)},
                       {"h0_note", o.h0_note},
                       {"h1_note", o.h1_note}});
  }
  return {{"strategy", std::string(to_string(t.strategy))}, {"pi", t.pi}, {"stages", rows}, {"overall", overall}};
}

json to_json(const TrialScenario& s) {
  return {{"n", s.n},
          {"pi", s.pi},
          {"accrual", s.accrual_duration},
          {"control_hazard", piecewise_to_json(s.control_hazard)},
          {"hazard_ratio", piecewise_to_json(s.hazard_ratio)},
          {"censor_rate", s.censor_rate},
          {"seed", s.seed}};
}

json to_json(const EmpiricalOcs& e) {
  json stages = json::array();
  for (const auto& s : e.stages) {
    stages.push_back({{"label", s.label},
                      {"planned_d", s.planned_d},
                      {"d_look", s.d_look},
                      {"theta_star", s.theta_star},
                      {"met", {{"value", s.met_fraction}, {"source", "empirical"}, {"std_error", s.met_std_error}}},
                      {"mean_log_hr", s.mean_log_hr},
                      {"sd_log_hr", s.sd_log_hr},
                      {"schoenfeld_sd", s.schoenfeld_sd},
                      {"mean_analysis_time", s.mean_analysis_time},
                      {"insufficient_events", s.insufficient_events},
                      {"monotone_likelihood", s.monotone_likelihood}});
  }
  return {{"replicates", e.replicates},
          {"seed", e.seed},
          {"stages", stages},
          {"all_met", {{"value", e.all_met_fraction}, {"source", "empirical"}, {"std_error", e.all_met_std_error}}},
          {"at_least_one_met",
           {{"value", e.at_least_one_met_fraction}, {"source", "empirical"}, {"std_error", e.at_least_one_met_std_error}}}};
}

json to_json(const DiscreteApproximation& a) {
  json points = json::array();
  for (const auto& p : a.points) {
    points.push_back({{"d", p.d},
                      {"theta_star", p.theta_star},
                      {"alpha", p.alpha},
                      {"power", p.power},
                      {"discrete_theta_star", p.discrete_theta_star},
                      {"discrete_alpha", p.discrete_alpha},
                      {"discrete_power", p.discrete_power},
                      {"alpha_cap_exceeded", p.alpha_cap_exceeded}});
  }
  json steps = json::array();
  for (const auto& s : a.steps) {
    steps.push_back({{"d_from", s.d_from},
                     {"d_to", s.d_to},
                     {"theta_star", s.theta_star},
                     {"max_alpha", s.max_alpha},
                     {"min_power", s.min_power},
                     {"alpha_cap_exceeded", s.alpha_cap_exceeded}});
  }
  return {{"points", points}, {"steps", steps}};
}

json plan_to_json(const MonitoringPlan& plan) {
  json stages = json::array();
  std::map<std::string, double> observed;
  for (const auto& st : plan.stages) {
    json s{{"label", st.label()},
           {"inputs", inputs_to_json(st.choice.values)},
           {"resolved", to_json(st.spec())},
           {"solve_route", std::string(to_string(st.solution.pattern.route))},
           {"warnings", st.solution.warnings}};
    if (st.planned_d) {
      s["planned_d"] = *st.planned_d;
      observed[st.label()] = st.spec().d;
    }
    stages.push_back(std::move(s));
  }
  json out{{"schema", std::string(kPlanSchema)},
           {"strategy", std::string(to_string(plan.strategy))},
           {"pi", plan.pi},
           {"rounding", std::string(to_string(plan.rounding))},
           {"stages", stages}};
  if (!observed.empty()) out["observed_deaths"] = observed;
  return out;
}

MonitoringPlan plan_from_json(const json& doc) { return build_plan(parse_plan_block(doc, "plan")); }

}  // namespace choose4
