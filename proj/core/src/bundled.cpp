#include <string>

#include "choose4/error.hpp"
#include "choose4/report.hpp"

namespace choose4 {

using nlohmann::json;

namespace {

json stage(std::string label, json inputs) {
  return {{"label", std::move(label)}, {"inputs", std::move(inputs)}};
}

json ocs_config(std::string name, std::string description, std::string strategy, json stages,
                json evaluation = json::object()) {
  return {{"schema", std::string(kConfigSchema)},
          {"name", std::move(name)},
          {"description", std::move(description)},
          {"command", "ocs"},
          {"seed", kDefaultSeed},
          {"plan", {{"strategy", std::move(strategy)}, {"pi", 0.5}, {"stages", std::move(stages)}}},
          {"evaluation", std::move(evaluation)}};
}

json ia(double d, const char* key, double value) {
  return {{"d", d}, {"theta0", 1.3}, {"theta1", 0.8}, {key, value}};
}

std::vector<BundledConfig> make_bundle() {
  std::vector<BundledConfig> out;

  out.push_back({"strategy1-fleming", "Strategy 1: Fleming et al.",
                 ocs_config("Strategy 1: Fleming et al. (2024)",
                            "Interim analyses fix beta = 0.1; the final analysis fixes alpha = 0.025.",
                            "Fleming",
                            json::array({stage("IA1", ia(89, "beta", 0.1)), stage("IA2", ia(110, "beta", 0.1)),
                                         stage("IA3", ia(131, "beta", 0.1)),
                                         stage("FA", ia(178, "alpha", 0.025))}))});

  out.push_back({"strategy2-rodriguez", "Strategy 2: Rodriguez et al.",
                 ocs_config("Strategy 2: Rodriguez et al. (2024)",
                            "Both error rates fixed; each analysis solves for (d, theta*).", "Rodriguez",
                            json::array({stage("IA", {{"theta0", 1.3}, {"theta1", 0.8}, {"alpha", 0.05}, {"beta", 0.1}}),
                                         stage("FA", {{"theta0", 1.3}, {"theta1", 0.8}, {"alpha", 0.025}, {"beta", 0.1}})}))});

  out.push_back({"strategy3a-standard-ci", "Strategy 3A: 95% confidence intervals",
                 ocs_config("Strategy 3A: standard 95% CIs",
                            "alpha = 0.025 at every analysis; the family-wise error rate is reported too.",
                            "StandardCI",
                            json::array({stage("IA1", ia(89, "alpha", 0.025)), stage("IA2", ia(110, "alpha", 0.025)),
                                         stage("IA3", ia(131, "alpha", 0.025)),
                                         stage("FA", ia(178, "alpha", 0.025))}),
                            {{"fwer", true}})});

  out.push_back({"strategy4-discrete", "Strategy 4: discrete thresholds",
                 ocs_config("Strategy 4: discrete thresholds",
                            "theta* fixed at 1.10, 1.05, 1.00 and 1.00.", "DiscreteThreshold",
                            json::array({stage("IA1", ia(89, "theta_star", 1.1)), stage("IA2", ia(110, "theta_star", 1.05)),
                                         stage("IA3", ia(131, "theta_star", 1.0)),
                                         stage("FA", ia(178, "theta_star", 1.0))}))});

  auto fda_ia = [](double d) { return json{{"d", d}, {"theta1", 0.8}, {"alpha", 0.025}, {"beta", 0.1}}; };
  out.push_back({"strategy5-fda-t2d", "Strategy 5: FDA guidance in T2D",
                 ocs_config("Strategy 5: FDA guidance in T2D (2008)",
                            "Interim analyses solve for the detriment theta0 ruled out with alpha = 0.025; "
                            "overall probabilities use HR = 1.30.",
                            "FdaT2D",
                            json::array({stage("IA1", fda_ia(89)), stage("IA2", fda_ia(110)), stage("IA3", fda_ia(131)),
                                         stage("FA", ia(178, "alpha", 0.025))}))});

  // Strategy 1 thresholds under a delayed effect: no benefit for the first
  // 6 months, HR 0.7 afterwards.
  json nph = ocs_config(
      "Strategy 1 under a delayed treatment effect",
      "Patient-level simulation with HR 1.0 before month 6 and 0.7 after; compares empirical and "
      "proportional-hazards operating characteristics.",
      "Fleming",
      json::array({stage("IA1", ia(89, "beta", 0.1)), stage("IA2", ia(110, "beta", 0.1)),
                   stage("IA3", ia(131, "beta", 0.1)), stage("FA", ia(178, "alpha", 0.025))}));
  nph["command"] = "simulate";
  nph["evaluation"] = {{"integration", {{"samples", 1 << 16}}}};
  nph["scenario"] = {{"n", 1000},
                     {"pi", 0.5},
                     {"accrual", 24.0},
                     {"control_hazard", json::array({{{"start", 0.0}, {"value", 0.01}}})},
                     {"hazard_ratio", json::array({{{"start", 0.0}, {"value", 1.0}}, {{"start", 6.0}, {"value", 0.7}}})},
                     {"censor_rate", 0.005}};
  nph["simulate"] = {{"replicates", 400}};
  out.push_back({"nph-delayed-effect", "Non-proportional hazards: delayed effect", nph});
  return out;
}

}  // namespace

const std::vector<BundledConfig>& bundled_configs() {
  static const std::vector<BundledConfig> bundle = make_bundle();
  return bundle;
}

const BundledConfig& bundled_config(std::string_view name) {
  for (const auto& b : bundled_configs()) {
    if (b.name == name) return b;
  }
  fail(ErrorCode::ConfigError, "no bundled config named '" + std::string(name) + "'");
}

}  // namespace choose4
