#pragma once

// Structured documents (JSON) for run configurations, plans, scenarios and
// results. Parsing is strict: unknown keys are rejected with
// Error(ConfigError) naming the offending path.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "choose4/design.hpp"
#include "choose4/joint_ocs.hpp"
#include "choose4/plan.hpp"
#include "choose4/trial_sim.hpp"

namespace choose4 {

inline constexpr std::string_view kConfigSchema = "choose4/config/v1";
inline constexpr std::string_view kPlanSchema = "choose4/plan/v1";
inline constexpr std::string_view kResultSchema = "choose4/result/v1";

enum class Command { Solve, Plan, Ocs, Simulate, Figure1 };
enum class OutputFormat { Markdown, Csv, Doc };

std::string_view to_string(Command c) noexcept;
std::optional<Command> command_from_name(std::string_view name) noexcept;
std::string_view to_string(OutputFormat f) noexcept;
std::optional<OutputFormat> format_from_name(std::string_view name) noexcept;

struct SolveBlock {
  ChosenValues inputs;
  double pi = kDefaultAllocation;
  RoundingPolicy rounding = RoundingPolicy::Exact;
};

struct PlanBlock {
  Strategy strategy = Strategy::Custom;
  double pi = kDefaultAllocation;
  RoundingPolicy rounding = RoundingPolicy::Exact;
  std::vector<ChoiceSpec> stages;
  std::map<std::string, double> observed_deaths;
};

struct EvaluationBlock {
  std::optional<double> h0_hr;
  std::optional<double> h1_hr;
  bool fwer = false;
  bool first_crossing = false;
  IntegrationSettings integration;
};

struct SimulateBlock {
  int replicates = 1000;
  std::optional<std::string> raw_output;
  unsigned threads = 0;
};

struct Figure1Block {
  ChosenValues inputs;  // three values; d is swept
  double pi = kDefaultAllocation;
  int d_min = 40;
  int d_max = 200;
  double grid_step = 0.05;
  std::optional<double> alpha_cap;
};

struct RunConfig {
  Command command = Command::Solve;
  std::string name;
  std::string description;
  std::optional<std::uint64_t> seed;
  OutputFormat format = OutputFormat::Markdown;
  std::optional<SolveBlock> solve;
  std::optional<PlanBlock> plan;
  std::optional<EvaluationBlock> evaluation;
  std::optional<TrialScenario> scenario;
  std::optional<SimulateBlock> simulate;
  std::optional<Figure1Block> figure1;
  nlohmann::json source;  // the document as read, echoed in provenance
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);

// Exactly four named values: {"d": 89, "theta0": 1.3, ...}.
ChosenValues parse_inputs(const nlohmann::json& obj, std::string_view path, int expected = 4);
nlohmann::json inputs_to_json(const ChosenValues& values);

SolveBlock parse_solve_block(const nlohmann::json& obj, std::string_view path = "solve");
SimulateBlock parse_simulate_block(const nlohmann::json& obj, std::string_view path = "simulate");
Figure1Block parse_figure1_block(const nlohmann::json& obj, std::string_view path = "figure1");
PlanBlock parse_plan_block(const nlohmann::json& obj, std::string_view path = "plan");
EvaluationBlock parse_evaluation_block(const nlohmann::json& obj,
                                       std::string_view path = "evaluation");
IntegrationSettings parse_integration(const nlohmann::json& obj, std::string_view path);
TrialScenario parse_scenario(const nlohmann::json& obj, std::string_view path = "scenario");

MonitoringPlan build_plan(const PlanBlock& block);

nlohmann::json to_json(const AnalysisSpec& spec);
nlohmann::json to_json(const Solution& solution);
nlohmann::json to_json(const TaggedProbability& p);
nlohmann::json to_json(const JointProbResult& r);
nlohmann::json to_json(const PlanTable& table);
nlohmann::json to_json(const TrialScenario& scenario);
nlohmann::json to_json(const EmpiricalOcs& ocs);
nlohmann::json to_json(const DiscreteApproximation& approx);

// Self-describing plan document; plan_from_json re-solves the chosen values
// and ignores the echoed resolved numbers.
nlohmann::json plan_to_json(const MonitoringPlan& plan);
MonitoringPlan plan_from_json(const nlohmann::json& doc);

}  // namespace choose4
