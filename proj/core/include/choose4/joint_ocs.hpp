#pragma once

// Overall operating characteristics of a monitoring plan.
//
// The standardised log-HR statistics at death counts d_1 < ... < d_K are
// modelled as jointly normal with unit variances and the independent-
// increments correlation Corr(Z_i, Z_j) = sqrt(d_i / d_j), i <= j.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "choose4/mvn.hpp"
#include "choose4/plan.hpp"

namespace choose4 {

enum class JointMode { AllMet, AtLeastOneMet, PerStageFirstCrossing };

std::string_view to_string(JointMode m) noexcept;
std::optional<JointMode> joint_mode_from_name(std::string_view name) noexcept;

struct JointProbRequest {
  MonitoringPlan plan;
  double true_hr = 1.0;
  JointMode mode = JointMode::AllMet;
  IntegrationSettings integration;
};

struct JointProbResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;  // 0 for closed-form evaluations
  std::uint64_t seed = 0;
  ProbabilitySource source = ProbabilitySource::ClosedForm;
  bool truncated = false;

  TaggedProbability tagged() const { return {estimate, source, std_error}; }
};

Matrix correlation_matrix(std::span<const double> deaths);

// Upper limits c_k such that "threshold k met" is the event Z_k < c_k.
std::vector<double> standardized_limits(const MonitoringPlan& plan, double true_hr);

JointProbResult prob_all_met(const MonitoringPlan& plan, double true_hr,
                             const IntegrationSettings& settings = {});
JointProbResult prob_at_least_one_met(const MonitoringPlan& plan, double true_hr,
                                      const IntegrationSettings& settings = {});
JointProbResult prob_flagged_at_least_once(const MonitoringPlan& plan, double true_hr,
                                           const IntegrationSettings& settings = {});
// Entry k: probability that stage k is the first threshold not met.
std::vector<JointProbResult> first_crossing(const MonitoringPlan& plan, double true_hr,
                                            const IntegrationSettings& settings = {});

// Dispatch on request.mode; one result except for PerStageFirstCrossing.
std::vector<JointProbResult> evaluate(const JointProbRequest& request);

struct OverallOptions {
  // Default: theta0 and theta1 of the final stage.
  std::optional<double> h0_hr;
  std::optional<double> h1_hr;
  bool include_fwer = false;
  IntegrationSettings integration;
};

// "Overall" rows for plan_table(): all thresholds met under H0 and under H1,
// plus (optionally) the family-wise error rate row.
std::vector<OverallRow> overall_rows(const MonitoringPlan& plan, const OverallOptions& options = {});

}  // namespace choose4
