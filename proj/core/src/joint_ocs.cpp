#include "choose4/joint_ocs.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "choose4/error.hpp"

namespace choose4 {

namespace {

ProbabilitySource source_of(const IntegrationSettings& s) {
  return s.method == IntegrationMethod::Qmc ? ProbabilitySource::Qmc
                                            : ProbabilitySource::MonteCarlo;
}

std::string hr_label(double hr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", hr);
  return buf;
}

void check_hr(double hr) {
  if (!(std::isfinite(hr) && hr > 0.0)) {
    fail(ErrorCode::DomainError, "evaluation hazard ratio must be positive");
  }
}

// P(Z_k < c_k for all k in the leading `count` stages).
JointProbResult leading_all_met(const MonitoringPlan& plan, std::size_t count, double true_hr,
                                const IntegrationSettings& settings, bool complement_events) {
  auto deaths = plan.deaths();
  auto limits = standardized_limits(plan, true_hr);
  deaths.resize(count);
  limits.resize(count);
  if (complement_events) {
    // {Z_k >= c_k} == {-Z_k <= -c_k}; negating every coordinate keeps the
    // correlation matrix unchanged.
    for (double& c : limits) c = -c;
  }
  const std::vector<double> zeros(count, 0.0);
  const auto r = mvn_lower_orthant(zeros, correlation_matrix(deaths), limits, settings);
  JointProbResult out;
  out.estimate = r.estimate;
  out.std_error = r.std_error;
  out.n_samples = r.n_samples;
  out.seed = r.seed;
  out.truncated = r.truncated;
  out.source = count == 1 ? ProbabilitySource::ClosedForm : source_of(settings);
  return out;
}

}  // namespace

std::string_view to_string(JointMode m) noexcept {
  switch (m) {
    case JointMode::AllMet: return "all-met";
    case JointMode::AtLeastOneMet: return "at-least-one-met";
    case JointMode::PerStageFirstCrossing: return "per-stage-first-crossing";
  }
  return "?";
}

std::optional<JointMode> joint_mode_from_name(std::string_view name) noexcept {
  for (auto m : {JointMode::AllMet, JointMode::AtLeastOneMet, JointMode::PerStageFirstCrossing}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

Matrix correlation_matrix(std::span<const double> deaths) {
  const std::size_t k = deaths.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (!(deaths[i] > 0.0)) fail(ErrorCode::DomainError, "death counts must be positive");
    if (i > 0 && !(deaths[i] > deaths[i - 1])) {
      fail(ErrorCode::NonmonotoneDeaths, "death counts must be strictly increasing");
    }
  }
  Matrix m(k);
  for (std::size_t i = 0; i < k; ++i) {
    m(i, i) = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      m(i, j) = m(j, i) = std::sqrt(deaths[i] / deaths[j]);
    }
  }
  return m;
}

std::vector<double> standardized_limits(const MonitoringPlan& plan, double true_hr) {
  check_hr(true_hr);
  std::vector<double> out;
  out.reserve(plan.stages.size());
  for (const auto& st : plan.stages) {
    const auto& s = st.spec();
    out.push_back(std::log(s.theta_star / true_hr) * information_root(s.d, plan.pi));
  }
  return out;
}

JointProbResult prob_all_met(const MonitoringPlan& plan, double true_hr,
                             const IntegrationSettings& settings) {
  if (plan.stages.empty()) fail(ErrorCode::DomainError, "plan has no stages");
  return leading_all_met(plan, plan.stages.size(), true_hr, settings, false);
}

JointProbResult prob_at_least_one_met(const MonitoringPlan& plan, double true_hr,
                                      const IntegrationSettings& settings) {
  if (plan.stages.empty()) fail(ErrorCode::DomainError, "plan has no stages");
  auto r = leading_all_met(plan, plan.stages.size(), true_hr, settings, true);
  r.estimate = 1.0 - r.estimate;
  return r;
}

JointProbResult prob_flagged_at_least_once(const MonitoringPlan& plan, double true_hr,
                                           const IntegrationSettings& settings) {
  auto r = prob_all_met(plan, true_hr, settings);
  r.estimate = 1.0 - r.estimate;
  return r;
}

std::vector<JointProbResult> first_crossing(const MonitoringPlan& plan, double true_hr,
                                            const IntegrationSettings& settings) {
  if (plan.stages.empty()) fail(ErrorCode::DomainError, "plan has no stages");
  std::vector<JointProbResult> out;
  JointProbResult previous;  // P(no stages) = 1
  previous.estimate = 1.0;
  for (std::size_t k = 1; k <= plan.stages.size(); ++k) {
    const auto current = leading_all_met(plan, k, true_hr, settings, false);
    JointProbResult r = current;
    r.estimate = previous.estimate - current.estimate;
    r.std_error = std::hypot(previous.std_error, current.std_error);
    r.truncated = previous.truncated || current.truncated;
    out.push_back(r);
    previous = current;
  }
  return out;
}

std::vector<JointProbResult> evaluate(const JointProbRequest& request) {
  switch (request.mode) {
    case JointMode::AllMet:
      return {prob_all_met(request.plan, request.true_hr, request.integration)};
    case JointMode::AtLeastOneMet:
      return {prob_at_least_one_met(request.plan, request.true_hr, request.integration)};
    case JointMode::PerStageFirstCrossing:
      return first_crossing(request.plan, request.true_hr, request.integration);
  }
  return {};
}

std::vector<OverallRow> overall_rows(const MonitoringPlan& plan, const OverallOptions& options) {
  if (plan.stages.empty()) fail(ErrorCode::DomainError, "plan has no stages");
  const auto& last = plan.stages.back().spec();
  const double h0 = options.h0_hr.value_or(last.theta0);
  const double h1 = options.h1_hr.value_or(last.theta1);

  std::vector<OverallRow> rows;
  OverallRow all;
  all.label = "Overall";
  all.h0_hr = h0;
  all.h1_hr = h1;
  all.h0_note = "P(all thresholds met | HR = " + hr_label(h0) + ")";
  all.h1_note = "P(all thresholds met | HR = " + hr_label(h1) + ")";
  all.under_h0 = prob_all_met(plan, h0, options.integration).tagged();
  all.under_h1 = prob_all_met(plan, h1, options.integration).tagged();
  rows.push_back(all);

  if (options.include_fwer) {
    OverallRow fwer;
    fwer.label = "FWER";
    fwer.h0_hr = h0;
    fwer.h1_hr = h1;
    fwer.h0_note = "P(at least one threshold met | HR = " + hr_label(h0) + ")";
    fwer.h1_note = "P(at least one threshold met | HR = " + hr_label(h1) + ")";
    fwer.under_h0 = prob_at_least_one_met(plan, h0, options.integration).tagged();
    fwer.under_h1 = prob_at_least_one_met(plan, h1, options.integration).tagged();
    rows.push_back(fwer);
  }
  return rows;
}

}  // namespace choose4
