#include "choose4/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "choose4/error.hpp"
#include "choose4/normal.hpp"

#ifndef CHOOSE4_VERSION
#define CHOOSE4_VERSION "0.0.0"
#endif

namespace choose4 {

using nlohmann::json;

std::string_view engine_version() noexcept { return CHOOSE4_VERSION; }

std::string fingerprint(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string fixed(double x, int decimals) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  std::string s = buf;
  // "-0.000" reads as a sign error in a table.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string full_precision(double x) {
  if (!std::isfinite(x)) return fixed(x, 0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// ---- execution ----------------------------------------------------------

IntegrationSettings integration_for(const RunConfig& cfg) {
  IntegrationSettings s = cfg.evaluation ? cfg.evaluation->integration : IntegrationSettings{};
  if (cfg.seed) s.seed = *cfg.seed;
  return s;
}

OverallOptions overall_options(const RunConfig& cfg) {
  OverallOptions o;
  if (cfg.evaluation) {
    o.h0_hr = cfg.evaluation->h0_hr;
    o.h1_hr = cfg.evaluation->h1_hr;
    o.include_fwer = cfg.evaluation->fwer;
  }
  o.integration = integration_for(cfg);
  return o;
}

json first_crossing_json(const MonitoringPlan& plan, const OverallOptions& o) {
  const auto& last = plan.stages.back().spec();
  const double h0 = o.h0_hr.value_or(last.theta0);
  const double h1 = o.h1_hr.value_or(last.theta1);
  const auto under_h0 = first_crossing(plan, h0, o.integration);
  const auto under_h1 = first_crossing(plan, h1, o.integration);
  json rows = json::array();
  for (std::size_t k = 0; k < plan.stages.size(); ++k) {
    rows.push_back({{"label", plan.stages[k].label()},
                    {"under_h0", to_json(under_h0[k])},
                    {"under_h1", to_json(under_h1[k])}});
  }
  return {{"h0_hr", h0}, {"h1_hr", h1}, {"stages", rows}};
}

// Hazard ratio the proportional-hazards design is compared against.
double reference_hr(const RunConfig& cfg, const TrialScenario& s) {
  if (s.hazard_ratio.single_segment()) return s.hazard_ratio.values().front();
  if (cfg.evaluation && cfg.evaluation->h1_hr) return *cfg.evaluation->h1_hr;
  return s.hazard_ratio.values().back();
}

json simulate_json(const RunConfig& cfg, const MonitoringPlan& plan, const RunOptions& opt) {
  TrialScenario scenario = *cfg.scenario;
  if (cfg.seed) scenario.seed = *cfg.seed;
  EmpiricalOptions eo;
  eo.threads = cfg.simulate->threads;
  eo.raw_rows = opt.raw_rows;
  const EmpiricalOcs emp = empirical_ocs(plan, scenario, cfg.simulate->replicates, eo);

  const double hr = reference_hr(cfg, scenario);
  const double v = plan.pi * (1.0 - plan.pi);
  json stages = json::array();
  for (const auto& s : emp.stages) {
    const double analytic = normal_cdf(std::log(s.theta_star / hr) * std::sqrt(v * s.d_look));
    const double drift = s.met_fraction - analytic;
    stages.push_back({{"label", s.label},
                      {"d_look", s.d_look},
                      {"analytic_met", {{"value", analytic}, {"source", "closed-form"}}},
                      {"empirical_met", {{"value", s.met_fraction}, {"source", "empirical"}, {"std_error", s.met_std_error}}},
                      {"drift", drift},
                      {"drift_z", s.met_std_error > 0.0 ? json(drift / s.met_std_error) : json(nullptr)},
                      {"mean_log_hr", s.mean_log_hr},
                      {"mean_analysis_time", s.mean_analysis_time},
                      {"sd_log_hr", s.sd_log_hr},
                      {"schoenfeld_sd", s.schoenfeld_sd},
                      {"sd_ratio", s.schoenfeld_sd > 0.0 ? s.sd_log_hr / s.schoenfeld_sd : 0.0}});
  }
  const JointProbResult joint = prob_all_met(plan, hr, integration_for(cfg));
  const double drift = emp.all_met_fraction - joint.estimate;
  const double se = std::hypot(emp.all_met_std_error, joint.std_error);
  json all{{"analytic", to_json(joint)},
           {"empirical", {{"value", emp.all_met_fraction}, {"source", "empirical"}, {"std_error", emp.all_met_std_error}}},
           {"drift", drift},
           {"drift_z", se > 0.0 ? json(drift / se) : json(nullptr)}};
  return {{"scenario", to_json(scenario)},
          {"proportional_hazards", scenario.hazard_ratio.single_segment()},
          {"reference_hr", hr},
          {"empirical", to_json(emp)},
          {"comparison", {{"stages", stages}, {"all_met", all}}}};
}

json figure1_json(const Figure1Block& b) {
  ChoiceSpec choice;
  choice.stage_label = "curve";
  choice.values = b.inputs;
  choice.values.set(Param::Deaths, b.d_min);
  const auto approx = discrete_approximation(choice, b.pi, b.d_min, b.d_max, b.grid_step, b.alpha_cap);
  json out = to_json(approx);
  out["inputs"] = inputs_to_json(b.inputs);
  out["pi"] = b.pi;
  out["grid_step"] = b.grid_step;
  if (b.alpha_cap) out["alpha_cap"] = *b.alpha_cap;
  return out;
}

// ---- rendering helpers --------------------------------------------------

double num(const json& j, std::string_view key) { return j.at(std::string(key)).get<double>(); }

std::string tag(const json& p) {
  std::string s = p.at("source").get<std::string>();
  if (p.contains("std_error")) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " +/- %.1e", p.at("std_error").get<double>());
    s += buf;
  }
  return s;
}

bool chosen(const json& row, std::string_view param) {
  for (const auto& c : row.at("chosen")) {
    if (c.get<std::string>() == param) return true;
  }
  return false;
}

std::string cell(const json& row, std::string_view param, double value, int decimals) {
  const std::string v = fixed(value, decimals);
  return chosen(row, param) ? "**" + v + "**" : v;
}

std::string provenance_line(const json& doc) {
  const json& p = doc.at("provenance");
  std::string s = "choose4 " + p.at("version").get<std::string>() + "; command=" +
                  p.at("command").get<std::string>();
  if (p.contains("seed")) s += "; seed=" + std::to_string(p.at("seed").get<std::uint64_t>());
  s += "; config=" + p.at("config_fingerprint").get<std::string>();
  return s;
}

void markdown_plan_table(std::ostream& os, const json& table) {
  os << "Strategy: " << table.at("strategy").get<std::string>() << ", pi = " << num(table, "pi")
     << ". Chosen values in bold.\n\n";
  os << "| Stage | d | theta0 | theta1 | theta* | P(met) under H0 (alpha) | P(met) under H1 (1-beta) | Source |\n";
  os << "|---|---|---|---|---|---|---|---|\n";
  std::vector<std::string> notes;
  for (const auto& r : table.at("stages")) {
    const std::string label = r.at("label").get<std::string>();
    os << "| " << label << " | " << cell(r, "d", num(r, "d"), 0) << " | "
       << cell(r, "theta0", num(r, "theta0"), 2) << " | " << cell(r, "theta1", num(r, "theta1"), 2)
       << " | " << cell(r, "theta_star", num(r, "theta_star"), 3) << " | "
       << cell(r, "alpha", num(r.at("alpha"), "value"), 3) << " | "
       << cell(r, "beta", num(r.at("power"), "value"), 3) << " | "
       << r.at("alpha").at("source").get<std::string>() << " |\n";
    if (r.contains("planned_d")) {
      notes.push_back(label + ": re-solved at observed d = " + full_precision(num(r, "d")) +
                      " (planned " + full_precision(num(r, "planned_d")) + ")");
    }
    const double d = num(r, "d");
    if (!chosen(r, "d") && d != std::round(d)) {
      notes.push_back(label + ": d = " + full_precision(d) + " before display rounding");
    }
    for (const auto& w : r.at("warnings")) notes.push_back(label + ": " + w.get<std::string>());
  }
  for (const auto& o : table.at("overall")) {
    os << "| " << o.at("label").get<std::string>() << " | - | - | - | - | "
       << fixed(num(o.at("under_h0"), "value"), 3) << " | " << fixed(num(o.at("under_h1"), "value"), 3)
       << " | " << tag(o.at("under_h0")) << "; " << tag(o.at("under_h1")) << " |\n";
    notes.push_back(o.at("label").get<std::string>() + " H0 column: " + o.at("h0_note").get<std::string>());
    notes.push_back(o.at("label").get<std::string>() + " H1 column: " + o.at("h1_note").get<std::string>());
  }
  if (!notes.empty()) {
    os << "\n";
    for (const auto& n : notes) os << "- " << n << "\n";
  }
}

std::string markdown(const json& doc) {
  std::ostringstream os;
  const json& prov = doc.at("provenance");
  const json& res = doc.at("result");
  const std::string command = prov.at("command").get<std::string>();
  const std::string name = prov.value("name", "");
  os << "# " << (name.empty() ? "choose4 " + command : name) << "\n\n";
  if (const std::string d = prov.value("description", ""); !d.empty()) os << d << "\n\n";

  if (command == "solve") {
    const json& s = res.at("resolved");
    os << "Solve route: " << res.at("solve_route").get<std::string>()
       << ". Probabilities are closed-form.\n\n";
    os << "| Parameter | Value | Display | Role |\n|---|---|---|---|\n";
    const std::vector<std::pair<std::string, int>> params = {
        {"theta0", 2}, {"theta1", 2}, {"d", 0}, {"theta_star", 3}, {"alpha", 3}, {"beta", 3}};
    for (const auto& [p, dec] : params) {
      bool input = false;
      for (const auto& i : res.at("inputs")) input = input || i.get<std::string>() == p;
      os << "| " << p << " | " << full_precision(num(s, p)) << " | " << fixed(num(s, p), dec) << " | "
         << (input ? "chosen" : "solved") << " |\n";
    }
    os << "| power | " << full_precision(num(s, "power")) << " | " << fixed(num(s, "power"), 3)
       << " | derived |\n";
    for (const auto& w : res.at("warnings")) os << "\n- warning: " << w.get<std::string>();
    if (!res.at("warnings").empty()) os << "\n";
  } else if (command == "plan" || command == "ocs" || command == "simulate") {
    markdown_plan_table(os, res.at("table"));
    if (res.contains("first_crossing")) {
      const json& fc = res.at("first_crossing");
      os << "\nFirst threshold not met (HR = " << fixed(num(fc, "h0_hr"), 3) << " / "
         << fixed(num(fc, "h1_hr"), 3) << "):\n\n| Stage | under H0 | under H1 | Source |\n|---|---|---|---|\n";
      for (const auto& r : fc.at("stages")) {
        os << "| " << r.at("label").get<std::string>() << " | " << fixed(num(r.at("under_h0"), "value"), 4)
           << " | " << fixed(num(r.at("under_h1"), "value"), 4) << " | " << tag(r.at("under_h0")) << "; "
           << tag(r.at("under_h1")) << " |\n";
      }
    }
    if (command == "simulate") {
      const json& cmp = res.at("comparison");
      const json& emp = res.at("empirical");
      os << "\nSimulation: " << emp.at("replicates").get<int>() << " replicates, seed "
         << emp.at("seed").get<std::uint64_t>() << ", "
         << (res.at("proportional_hazards").get<bool>() ? "proportional hazards"
                                                        : "non-proportional hazards")
         << ", analytic reference HR = " << fixed(num(res, "reference_hr"), 3) << ".\n\n";
      os << "| Stage | d look | mean time | mean HR estimate | analytic P(met) | empirical P(met) | SE | drift | z | SD log HR | Schoenfeld SD |\n";
      os << "|---|---|---|---|---|---|---|---|---|---|---|\n";
      for (const auto& r : cmp.at("stages")) {
        os << "| " << r.at("label").get<std::string>() << " | " << r.at("d_look").get<int>() << " | "
           << fixed(num(r, "mean_analysis_time"), 1) << " | " << fixed(std::exp(num(r, "mean_log_hr")), 3) << " | "
           << fixed(num(r.at("analytic_met"), "value"), 4) << " | "
           << fixed(num(r.at("empirical_met"), "value"), 4) << " | "
           << fixed(num(r.at("empirical_met"), "std_error"), 4) << " | " << fixed(num(r, "drift"), 4)
           << " | " << (r.at("drift_z").is_null() ? std::string("-") : fixed(num(r, "drift_z"), 2)) << " | "
           << fixed(num(r, "sd_log_hr"), 4) << " | " << fixed(num(r, "schoenfeld_sd"), 4) << " |\n";
      }
      const json& all = cmp.at("all_met");
      os << "| All met | - | - | - | " << fixed(num(all.at("analytic"), "value"), 4) << " | "
         << fixed(num(all.at("empirical"), "value"), 4) << " | "
         << fixed(num(all.at("empirical"), "std_error"), 4) << " | " << fixed(num(all, "drift"), 4) << " | "
         << (all.at("drift_z").is_null() ? std::string("-") : fixed(num(all, "drift_z"), 2))
         << " | - | - |\n\nAnalytic: " << tag(all.at("analytic"))
         << "; empirical: " << tag(all.at("empirical")) << ".\n";
    }
  } else if (command == "figure1") {
    os << "Grid step " << num(res, "grid_step") << ". Probabilities are closed-form.\n\n";
    os << "| d from | d to | discrete theta* | max alpha | min power |\n|---|---|---|---|---|\n";
    for (const auto& s : res.at("steps")) {
      os << "| " << s.at("d_from").get<int>() << " | " << s.at("d_to").get<int>() << " | "
         << fixed(num(s, "theta_star"), 2) << " | " << fixed(num(s, "max_alpha"), 3) << " | "
         << fixed(num(s, "min_power"), 3) << (s.at("alpha_cap_exceeded").get<bool>() ? " (alpha cap exceeded)" : "")
         << " |\n";
    }
    os << "\n| d | theta* | alpha | power | discrete theta* | discrete alpha | discrete power |\n";
    os << "|---|---|---|---|---|---|---|\n";
    for (const auto& p : res.at("points")) {
      os << "| " << p.at("d").get<int>() << " | " << fixed(num(p, "theta_star"), 3) << " | "
         << fixed(num(p, "alpha"), 3) << " | " << fixed(num(p, "power"), 3) << " | "
         << fixed(num(p, "discrete_theta_star"), 2) << " | " << fixed(num(p, "discrete_alpha"), 3) << " | "
         << fixed(num(p, "discrete_power"), 3) << " |\n";
    }
  }
  os << "\n---\n" << provenance_line(doc) << "\n";
  return os.str();
}

// Long CSV: one value per line, full precision plus display rounding.
class CsvLong {
 public:
  explicit CsvLong(std::ostream& os) : os_(os) {
    os_ << "section,label,quantity,value,display,role,source,std_error\n";
  }
  void add(std::string_view section, std::string_view label, std::string_view quantity, double value,
           int decimals, std::string_view role, std::string_view source = "", const json* se = nullptr) {
    os_ << section << ',' << label << ',' << quantity << ',' << full_precision(value) << ','
        << fixed(value, decimals) << ',' << role << ',' << source << ','
        << (se ? full_precision(se->get<double>()) : std::string()) << '\n';
  }
  void add_prob(std::string_view section, std::string_view label, std::string_view quantity,
                const json& p, int decimals, std::string_view role = "") {
    add(section, label, quantity, num(p, "value"), decimals, role, p.at("source").get<std::string>(),
        p.contains("std_error") ? &p.at("std_error") : nullptr);
  }

 private:
  std::ostream& os_;
};

std::string csv(const json& doc) {
  std::ostringstream os;
  os << "# " << provenance_line(doc) << "\n";
  const json& res = doc.at("result");
  const std::string command = doc.at("provenance").at("command").get<std::string>();

  if (command == "figure1") {
    os << "d,theta_star,theta_star_display,discrete_theta_star,discrete_theta_star_display,"
          "alpha,alpha_display,power,power_display,discrete_alpha,discrete_alpha_display,"
          "discrete_power,discrete_power_display,alpha_cap_exceeded,source\n";
    for (const auto& p : res.at("points")) {
      os << p.at("d").get<int>();
      for (const auto& [k, dec] : std::vector<std::pair<std::string, int>>{{"theta_star", 3},
                                                                            {"discrete_theta_star", 2},
                                                                            {"alpha", 3},
                                                                            {"power", 3},
                                                                            {"discrete_alpha", 3},
                                                                            {"discrete_power", 3}}) {
        os << ',' << full_precision(num(p, k)) << ',' << fixed(num(p, k), dec);
      }
      os << ',' << (p.at("alpha_cap_exceeded").get<bool>() ? "true" : "false") << ",closed-form\n";
    }
    return os.str();
  }

  CsvLong out(os);
  if (command == "solve") {
    const json& s = res.at("resolved");
    for (const auto& [p, dec] : std::vector<std::pair<std::string, int>>{
             {"theta0", 2}, {"theta1", 2}, {"d", 0}, {"theta_star", 3}, {"alpha", 3}, {"beta", 3}, {"power", 3}}) {
      bool input = false;
      for (const auto& i : res.at("inputs")) input = input || i.get<std::string>() == p;
      const bool prob = p == "alpha" || p == "beta" || p == "power";
      out.add("solve", "", p, num(s, p), dec, input ? "chosen" : (p == "power" ? "derived" : "solved"),
              prob ? "closed-form" : "");
    }
    return os.str();
  }

  const json& table = res.at("table");
  for (const auto& r : table.at("stages")) {
    const std::string label = r.at("label").get<std::string>();
    auto role = [&](std::string_view p) { return chosen(r, p) ? "chosen" : "solved"; };
    out.add("stage", label, "d", num(r, "d"), 0, role("d"));
    out.add("stage", label, "theta0", num(r, "theta0"), 2, role("theta0"));
    out.add("stage", label, "theta1", num(r, "theta1"), 2, role("theta1"));
    out.add("stage", label, "theta_star", num(r, "theta_star"), 3, role("theta_star"));
    out.add_prob("stage", label, "alpha", r.at("alpha"), 3, role("alpha"));
    out.add_prob("stage", label, "power", r.at("power"), 3, role("beta"));
  }
  for (const auto& o : table.at("overall")) {
    const std::string label = o.at("label").get<std::string>();
    out.add_prob("overall", label, "under_h0", o.at("under_h0"), 3);
    out.add_prob("overall", label, "under_h1", o.at("under_h1"), 3);
  }
  if (res.contains("first_crossing")) {
    for (const auto& r : res.at("first_crossing").at("stages")) {
      const std::string label = r.at("label").get<std::string>();
      out.add_prob("first_crossing", label, "under_h0", r.at("under_h0"), 4);
      out.add_prob("first_crossing", label, "under_h1", r.at("under_h1"), 4);
    }
  }
  if (command == "simulate") {
    const json& cmp = res.at("comparison");
    for (const auto& r : cmp.at("stages")) {
      const std::string label = r.at("label").get<std::string>();
      out.add("simulation", label, "d_look", num(r, "d_look"), 0, "");
      out.add_prob("simulation", label, "analytic_met", r.at("analytic_met"), 4);
      out.add_prob("simulation", label, "empirical_met", r.at("empirical_met"), 4);
      out.add("simulation", label, "drift", num(r, "drift"), 4, "");
      out.add("simulation", label, "mean_log_hr", num(r, "mean_log_hr"), 4, "");
      out.add("simulation", label, "sd_log_hr", num(r, "sd_log_hr"), 4, "");
      out.add("simulation", label, "schoenfeld_sd", num(r, "schoenfeld_sd"), 4, "");
    }
    const json& all = cmp.at("all_met");
    out.add_prob("simulation", "all", "analytic_met", all.at("analytic"), 4);
    out.add_prob("simulation", "all", "empirical_met", all.at("empirical"), 4);
    out.add("simulation", "all", "drift", num(all, "drift"), 4, "");
  }
  return os.str();
}

}  // namespace

json execute(const RunConfig& cfg, const RunOptions& opt) {
  json result;
  json provenance{{"tool", "choose4"},
                  {"version", std::string(engine_version())},
                  {"command", std::string(to_string(cfg.command))},
                  {"name", cfg.name},
                  {"description", cfg.description},
                  {"config_fingerprint", fingerprint(cfg.source)},
                  {"config", cfg.source}};

  switch (cfg.command) {
    case Command::Solve: {
      if (!cfg.solve) fail(ErrorCode::ConfigError, "solve: block missing");
      const Solution sol = solve(cfg.solve->inputs, cfg.solve->pi, cfg.solve->rounding);
      result = to_json(sol);
      result["request"] = {{"inputs", inputs_to_json(cfg.solve->inputs)}, {"pi", cfg.solve->pi}};
      break;
    }
    case Command::Plan:
    case Command::Ocs:
    case Command::Simulate: {
      if (!cfg.plan) fail(ErrorCode::ConfigError, "plan: block missing");
      const MonitoringPlan plan = build_plan(*cfg.plan);
      std::vector<OverallRow> overall;
      const OverallOptions oo = overall_options(cfg);
      if (cfg.command != Command::Plan) {
        overall = overall_rows(plan, oo);
        provenance["seed"] = oo.integration.seed;
      }
      result["plan"] = plan_to_json(plan);
      result["table"] = to_json(plan_table(plan, std::move(overall)));
      if (cfg.command != Command::Plan && cfg.evaluation && cfg.evaluation->first_crossing) {
        result["first_crossing"] = first_crossing_json(plan, oo);
      }
      if (cfg.command == Command::Simulate) {
        if (!cfg.scenario || !cfg.simulate) fail(ErrorCode::ConfigError, "simulate: scenario missing");
        json sim = simulate_json(cfg, plan, opt);
        provenance["seed"] = sim.at("scenario").at("seed");
        provenance["integration_seed"] = oo.integration.seed;
        result.update(sim);
      }
      break;
    }
    case Command::Figure1: {
      if (!cfg.figure1) fail(ErrorCode::ConfigError, "figure1: block missing");
      result = figure1_json(*cfg.figure1);
      break;
    }
  }
  return {{"schema", std::string(kResultSchema)}, {"provenance", provenance}, {"result", result}};
}

std::string render(const json& doc, OutputFormat format) {
  switch (format) {
    case OutputFormat::Markdown: return markdown(doc);
    case OutputFormat::Csv: return csv(doc);
    case OutputFormat::Doc: return doc.dump(2) + "\n";
  }
  return {};
}

}  // namespace choose4
