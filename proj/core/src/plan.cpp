#include "choose4/plan.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "choose4/error.hpp"

namespace choose4 {

namespace {

std::string describe(ParamSet s) {
  std::string out = "{";
  bool first = true;
  for (Param p : s.members()) {
    if (!first) out += ", ";
    out += param_name(p);
    first = false;
  }
  return out + "}";
}

std::vector<StrategyTemplate> make_templates() {
  using P = Param;
  return {
      {Strategy::Fleming, "Fleming et al. (2024)",
       "IAs choose (theta0, theta1, beta, d); the FA chooses (theta0, theta1, alpha, d).",
       ParamSet{P::Alpha, P::ThetaStar}, ParamSet{P::Beta, P::ThetaStar}},
      {Strategy::Rodriguez, "Rodriguez et al. (2024)",
       "Every analysis chooses (theta0, theta1, alpha, beta) and solves for (d, theta_star).",
       ParamSet{P::Deaths, P::ThetaStar}, ParamSet{P::Deaths, P::ThetaStar}},
      {Strategy::StandardCI, "Standard confidence intervals",
       "Every analysis chooses (theta0, theta1, alpha, d); the 100(1-2 alpha)% CI must exclude theta0.",
       ParamSet{P::Beta, P::ThetaStar}, ParamSet{P::Beta, P::ThetaStar}},
      {Strategy::DiscreteThreshold, "Discrete thresholds",
       "Every analysis chooses (theta0, theta1, d, theta_star) with theta_star on a simple grid.",
       ParamSet{P::Alpha, P::Beta}, ParamSet{P::Alpha, P::Beta}},
      {Strategy::FdaT2D, "FDA guidance in T2D (2008)",
       "IAs choose (theta1, alpha, beta, d) and solve for the detriment theta0 that can be ruled out; "
       "the FA chooses (theta0, theta1, alpha, d).",
       ParamSet{P::Theta0, P::ThetaStar}, ParamSet{P::Beta, P::ThetaStar}},
      {Strategy::Custom, "Custom", "Any solvable pattern at any stage.", std::nullopt, std::nullopt},
  };
}

void check_increasing(const std::vector<PlanStage>& stages) {
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (!(stages[i].spec().d > stages[i - 1].spec().d)) {
      fail(ErrorCode::NonmonotoneDeaths,
           "death counts must be strictly increasing across stages (" + stages[i - 1].label() +
               " and " + stages[i].label() + " share d = " + std::to_string(stages[i].spec().d) + ")");
    }
  }
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Fleming: return "Fleming";
    case Strategy::Rodriguez: return "Rodriguez";
    case Strategy::StandardCI: return "StandardCI";
    case Strategy::DiscreteThreshold: return "DiscreteThreshold";
    case Strategy::FdaT2D: return "FdaT2D";
    case Strategy::Custom: return "Custom";
  }
  return "?";
}

std::optional<Strategy> strategy_from_name(std::string_view name) noexcept {
  for (auto s : {Strategy::Fleming, Strategy::Rodriguez, Strategy::StandardCI,
                 Strategy::DiscreteThreshold, Strategy::FdaT2D, Strategy::Custom}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(ProbabilitySource s) noexcept {
  switch (s) {
    case ProbabilitySource::ClosedForm: return "closed-form";
    case ProbabilitySource::Qmc: return "qmc";
    case ProbabilitySource::MonteCarlo: return "mc";
    case ProbabilitySource::Empirical: return "empirical";
  }
  return "?";
}

const std::vector<StrategyTemplate>& strategy_templates() {
  static const std::vector<StrategyTemplate> templates = make_templates();
  return templates;
}

const StrategyTemplate& strategy_template(Strategy s) {
  for (const auto& t : strategy_templates()) {
    if (t.strategy == s) return t;
  }
  fail(ErrorCode::DomainError, "unknown strategy");
}

std::vector<double> MonitoringPlan::deaths() const {
  std::vector<double> out;
  out.reserve(stages.size());
  for (const auto& s : stages) out.push_back(s.spec().d);
  return out;
}

std::vector<double> MonitoringPlan::thresholds() const {
  std::vector<double> out;
  out.reserve(stages.size());
  for (const auto& s : stages) out.push_back(s.spec().theta_star);
  return out;
}

const PlanStage& MonitoringPlan::stage(std::string_view label) const {
  for (const auto& s : stages) {
    if (s.label() == label) return s;
  }
  fail(ErrorCode::DomainError, "no stage labelled '" + std::string(label) + "'");
}

MonitoringPlan build_plan(Strategy strategy, const std::vector<ChoiceSpec>& stage_choices,
                          double pi, RoundingPolicy rounding) {
  if (stage_choices.empty()) fail(ErrorCode::DomainError, "a plan needs at least one stage");
  std::set<std::string> labels;
  for (const auto& c : stage_choices) {
    if (!labels.insert(c.stage_label).second) {
      fail(ErrorCode::DomainError, "duplicate stage label '" + c.stage_label + "'");
    }
  }

  MonitoringPlan plan;
  plan.strategy = strategy;
  plan.pi = pi;
  plan.rounding = rounding;
  for (const auto& choice : stage_choices) {
    try {
      plan.stages.push_back(PlanStage{choice, solve(choice.values, pi, rounding), std::nullopt});
    } catch (const Error& e) {
      throw Error(e.code(), "stage " + choice.stage_label + ": " + e.what());
    }
  }
  std::stable_sort(plan.stages.begin(), plan.stages.end(),
                   [](const PlanStage& a, const PlanStage& b) { return a.spec().d < b.spec().d; });
  check_increasing(plan.stages);

  const auto& tmpl = strategy_template(strategy);
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const bool final_stage = i + 1 == plan.stages.size();
    const auto& required = final_stage ? tmpl.final_unknowns : tmpl.interim_unknowns;
    if (!required) continue;
    const ParamSet got = plan.stages[i].solution.pattern.unknowns;
    if (!(got == *required)) {
      fail(ErrorCode::PatternMismatch,
           "stage " + plan.stages[i].label() + ": " + std::string(to_string(strategy)) +
               (final_stage ? " final" : " interim") + " analyses solve for " + describe(*required) +
               ", but the chosen parameters leave " + describe(got) + " unknown");
    }
  }
  return plan;
}

Solution recompute_for_observed(const MonitoringPlan& plan, std::string_view stage_label,
                                double observed_d) {
  if (!(std::isfinite(observed_d) && observed_d > 0.0)) {
    fail(ErrorCode::DomainError, "observed death count must be positive");
  }
  const PlanStage& stage = plan.stage(stage_label);
  const ChoicePattern pattern = stage.solution.pattern;

  if (pattern.inputs.contains(Param::Deaths)) {
    ChosenValues values;
    for (Param p : pattern.inputs.members()) {
      values.set(p, p == Param::Deaths ? observed_d : *stage.choice.values.get(p));
    }
    return solve(values, plan.pi, RoundingPolicy::Exact);
  }

  // d was solved for: pin it and let the adjusted pattern absorb the change.
  Solution sol = stage.solution;
  const ChoicePattern adjusted = pattern_with_deaths_fixed(pattern);
  AnalysisSpec spec;
  spec.pi = plan.pi;
  for (Param p : pattern.inputs.members()) spec.set(p, *stage.choice.values.get(p));
  spec.d = observed_d;
  // The adjusted pattern's inputs are the original inputs plus d.
  sol.spec = complete(spec, adjusted);
  sol.final_pattern = adjusted;
  sol.rounding = RoundingPolicy::Exact;
  sol.warnings.push_back("d pinned to observed " + std::to_string(observed_d) + "; solved for " +
                         describe(adjusted.unknowns));
  return sol;
}

MonitoringPlan with_observed_deaths(const MonitoringPlan& plan,
                                    const std::map<std::string, double>& observed) {
  MonitoringPlan out = plan;
  for (const auto& [label, d] : observed) {
    bool found = false;
    for (auto& stage : out.stages) {
      if (stage.label() != label) continue;
      found = true;
      const double planned = stage.spec().d;
      stage.solution = recompute_for_observed(plan, label, d);
      stage.planned_d = planned;
    }
    if (!found) fail(ErrorCode::DomainError, "no stage labelled '" + label + "'");
  }
  std::stable_sort(out.stages.begin(), out.stages.end(),
                   [](const PlanStage& a, const PlanStage& b) { return a.spec().d < b.spec().d; });
  check_increasing(out.stages);
  return out;
}

double round_up_to_grid(double theta, double grid_step) {
  if (!(grid_step > 0.0 && std::isfinite(grid_step))) {
    fail(ErrorCode::DomainError, "grid_step must be positive");
  }
  double k = std::ceil((theta - 1.0) / grid_step - 1e-9);
  while (1.0 + k * grid_step < theta) k += 1.0;
  return 1.0 + k * grid_step;
}

DiscreteApproximation discrete_approximation(const ChoiceSpec& choice, double pi, int d_min,
                                             int d_max, double grid_step,
                                             std::optional<double> alpha_cap) {
  if (d_min < 1 || d_max < d_min) fail(ErrorCode::DomainError, "invalid death-count range");
  if (!(grid_step > 0.0)) fail(ErrorCode::DomainError, "grid_step must be positive");

  MonitoringPlan single;
  single.pi = pi;
  single.stages.push_back(PlanStage{choice, solve(choice.values, pi), std::nullopt});

  DiscreteApproximation out;
  out.points.reserve(static_cast<std::size_t>(d_max - d_min + 1));
  for (int d = d_min; d <= d_max; ++d) {
    const AnalysisSpec s = recompute_for_observed(single, choice.stage_label, d).spec;
    CurvePoint pt;
    pt.d = d;
    pt.theta_star = s.theta_star;
    pt.alpha = s.alpha;
    pt.power = s.power();
    pt.discrete_theta_star = round_up_to_grid(s.theta_star, grid_step);
    pt.discrete_alpha = alpha_from(pt.discrete_theta_star, s.theta0, d, pi);
    pt.discrete_power = power_from(pt.discrete_theta_star, s.theta1, d, pi);
    pt.alpha_cap_exceeded = alpha_cap.has_value() && pt.discrete_alpha > *alpha_cap;
    out.points.push_back(pt);
  }

  for (const auto& pt : out.points) {
    if (!out.steps.empty() && out.steps.back().theta_star == pt.discrete_theta_star) {
      auto& st = out.steps.back();
      st.d_to = pt.d;
      st.max_alpha = std::max(st.max_alpha, pt.discrete_alpha);
      st.min_power = std::min(st.min_power, pt.discrete_power);
      st.alpha_cap_exceeded = st.alpha_cap_exceeded || pt.alpha_cap_exceeded;
    } else {
      out.steps.push_back(DiscreteStep{pt.d, pt.d, pt.discrete_theta_star, pt.discrete_alpha,
                                       pt.discrete_power, pt.alpha_cap_exceeded});
    }
  }
  return out;
}

DiscreteApproximation discrete_approximation(const MonitoringPlan& plan,
                                             std::string_view stage_label, int d_min, int d_max,
                                             double grid_step, std::optional<double> alpha_cap) {
  return discrete_approximation(plan.stage(stage_label).choice, plan.pi, d_min, d_max, grid_step,
                                alpha_cap);
}

PlanTable plan_table(const MonitoringPlan& plan, std::vector<OverallRow> overall) {
  PlanTable t;
  t.strategy = plan.strategy;
  t.pi = plan.pi;
  for (const auto& st : plan.stages) {
    const AnalysisSpec& s = st.spec();
    PlanTableRow row;
    row.label = st.label();
    row.d = s.d;
    row.theta0 = s.theta0;
    row.theta1 = s.theta1;
    row.theta_star = s.theta_star;
    row.alpha = {s.alpha, ProbabilitySource::ClosedForm, 0.0};
    row.power = {s.power(), ProbabilitySource::ClosedForm, 0.0};
    row.chosen = st.solution.pattern.inputs;
    row.planned_d = st.planned_d;
    row.warnings = st.solution.warnings;
    t.rows.push_back(std::move(row));
  }
  t.overall = std::move(overall);
  return t;
}

}  // namespace choose4
