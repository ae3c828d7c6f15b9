#pragma once

// Multi-analysis monitoring plans built from per-stage "choose 4" designs.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "choose4/design.hpp"

namespace choose4 {

enum class Strategy { Fleming, Rodriguez, StandardCI, DiscreteThreshold, FdaT2D, Custom };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> strategy_from_name(std::string_view name) noexcept;

// Required unknowns for interim stages and for the final (last by d) stage.
// Custom carries no constraint.
struct StrategyTemplate {
  Strategy strategy = Strategy::Custom;
  std::string title;
  std::string summary;
  std::optional<ParamSet> interim_unknowns;
  std::optional<ParamSet> final_unknowns;
};

const std::vector<StrategyTemplate>& strategy_templates();
const StrategyTemplate& strategy_template(Strategy s);

struct ChoiceSpec {
  std::string stage_label;
  ChosenValues values;

  ChoicePattern pattern() const { return ChoicePattern::from_inputs(values.which()); }
};

struct PlanStage {
  ChoiceSpec choice;
  Solution solution;
  // Set when the stage was re-solved for an observed death count.
  std::optional<double> planned_d;

  const std::string& label() const noexcept { return choice.stage_label; }
  const AnalysisSpec& spec() const noexcept { return solution.spec; }
};

struct MonitoringPlan {
  Strategy strategy = Strategy::Custom;
  std::vector<PlanStage> stages;  // strictly increasing d
  double pi = kDefaultAllocation;
  RoundingPolicy rounding = RoundingPolicy::Exact;

  std::vector<double> deaths() const;
  std::vector<double> thresholds() const;
  const PlanStage& stage(std::string_view label) const;
};

MonitoringPlan build_plan(Strategy strategy, const std::vector<ChoiceSpec>& stage_choices,
                          double pi = kDefaultAllocation,
                          RoundingPolicy rounding = RoundingPolicy::Exact);

// Re-solves one stage with its death count replaced by `observed_d`. When d
// was chosen it is substituted; when d was solved for it becomes an input
// and the pattern adjusts as in pattern_with_deaths_fixed().
Solution recompute_for_observed(const MonitoringPlan& plan, std::string_view stage_label,
                                double observed_d);

// Whole-plan variant: every listed stage is re-solved at its observed count.
// Stages keep their planned d in PlanStage::planned_d.
MonitoringPlan with_observed_deaths(const MonitoringPlan& plan,
                                    const std::map<std::string, double>& observed);

struct CurvePoint {
  int d = 0;
  double theta_star = 0.0;  // continuous threshold for this d
  double alpha = 0.0;
  double power = 0.0;
  double discrete_theta_star = 0.0;
  double discrete_alpha = 0.0;
  double discrete_power = 0.0;
  bool alpha_cap_exceeded = false;
};

struct DiscreteStep {
  int d_from = 0;
  int d_to = 0;
  double theta_star = 0.0;
  double max_alpha = 0.0;
  double min_power = 0.0;
  bool alpha_cap_exceeded = false;
};

struct DiscreteApproximation {
  std::vector<CurvePoint> points;
  std::vector<DiscreteStep> steps;
};

// Smallest grid value 1.0 + k * grid_step (k integer) that is >= theta.
double round_up_to_grid(double theta, double grid_step);

// Sweeps integer d over [d_min, d_max] re-solving `choice` (its d replaced),
// and rounds every continuous threshold up to the grid.
DiscreteApproximation discrete_approximation(const ChoiceSpec& choice, double pi, int d_min,
                                             int d_max, double grid_step = 0.05,
                                             std::optional<double> alpha_cap = std::nullopt);

DiscreteApproximation discrete_approximation(const MonitoringPlan& plan,
                                             std::string_view stage_label, int d_min, int d_max,
                                             double grid_step = 0.05,
                                             std::optional<double> alpha_cap = std::nullopt);

enum class ProbabilitySource { ClosedForm, Qmc, MonteCarlo, Empirical };
std::string_view to_string(ProbabilitySource s) noexcept;

struct TaggedProbability {
  double value = 0.0;
  ProbabilitySource source = ProbabilitySource::ClosedForm;
  double std_error = 0.0;
};

struct PlanTableRow {
  std::string label;
  double d = 0.0;
  double theta0 = 0.0;
  double theta1 = 0.0;
  double theta_star = 0.0;
  TaggedProbability alpha;
  TaggedProbability power;
  ParamSet chosen;
  std::optional<double> planned_d;
  std::vector<std::string> warnings;
};

struct OverallRow {
  std::string label;  // e.g. "Overall"
  std::string h0_note;
  std::string h1_note;
  double h0_hr = 0.0;
  double h1_hr = 0.0;
  TaggedProbability under_h0;
  TaggedProbability under_h1;
};

struct PlanTable {
  Strategy strategy = Strategy::Custom;
  double pi = kDefaultAllocation;
  std::vector<PlanTableRow> rows;
  std::vector<OverallRow> overall;
};

PlanTable plan_table(const MonitoringPlan& plan, std::vector<OverallRow> overall = {});

}  // namespace choose4
