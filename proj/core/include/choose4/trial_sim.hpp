#pragma once

// Patient-level Monte Carlo oracle for the normal-approximation design
// equations and the joint operating characteristics.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "choose4/plan.hpp"

namespace choose4 {

// Piecewise-constant function of time since randomisation; segment i covers
// [starts[i], starts[i+1]) and the last segment extends to infinity.
class PiecewiseConstant {
 public:
  PiecewiseConstant() = default;
  // Throws Error(InvalidScenario) unless starts[0] == 0, starts strictly
  // increase and every value is positive.
  PiecewiseConstant(std::vector<double> starts, std::vector<double> values);
  static PiecewiseConstant constant(double value) { return {{0.0}, {value}}; }

  double at(double t) const noexcept;
  // Integral over [0, t].
  double cumulative(double t) const noexcept;
  // Smallest t with cumulative(t) = target (target >= 0).
  double inverse_cumulative(double target) const noexcept;

  const std::vector<double>& starts() const noexcept { return starts_; }
  const std::vector<double>& values() const noexcept { return values_; }
  bool single_segment() const noexcept { return values_.size() == 1; }

  // Pointwise product over the union of both breakpoint sets.
  friend PiecewiseConstant operator*(const PiecewiseConstant& a, const PiecewiseConstant& b);

 private:
  std::vector<double> starts_;
  std::vector<double> values_;
};

struct TrialScenario {
  int n = 0;
  double pi = kDefaultAllocation;
  double accrual_duration = 0.0;  // 0 = everyone enters at time 0
  PiecewiseConstant control_hazard;
  PiecewiseConstant hazard_ratio = PiecewiseConstant::constant(1.0);
  double censor_rate = 0.0;
  std::uint64_t seed = 0;
};

void validate(const TrialScenario& scenario);

enum class Arm : std::uint8_t { Control = 0, Experimental = 1 };

struct PatientHistory {
  Arm arm = Arm::Control;
  double entry = 0.0;
  double event_time = std::numeric_limits<double>::infinity();    // since entry
  double dropout_time = std::numeric_limits<double>::infinity();  // since entry
};

struct EventHistory {
  std::vector<PatientHistory> patients;
  std::vector<double> death_calendar_times;  // sorted, observed deaths only
};

// Draws one trial. `stream` selects an independent random stream derived from
// scenario.seed, so replicate r of a study is simulate_trial(scenario, r).
EventHistory simulate_trial(const TrialScenario& scenario, std::uint64_t stream = 0);

struct ObservedPatient {
  Arm arm = Arm::Control;
  double entry = 0.0;
  double time = 0.0;  // follow-up since entry
  bool event = false;
};

struct TrialSnapshot {
  double analysis_time = 0.0;
  std::vector<ObservedPatient> patients;  // enrolled by analysis_time
  int d_requested = 0;
  int d_observed = 0;
  bool insufficient_events = false;
};

// Administratively censors everyone at the calendar time of the d-th death.
// With fewer than d deaths the snapshot is taken at the last death and
// flagged with insufficient_events.
TrialSnapshot snapshot_at_deaths(const EventHistory& history, int d);

struct HrEstimate {
  double theta_hat = 1.0;
  double log_hr = 0.0;
  double std_error_log_hr = 0.0;
  int iterations = 0;
  int events_control = 0;
  int events_experimental = 0;
};

// Two-arm Cox model (experimental indicator), Breslow ties, Newton iteration
// to |score| < 1e-10. Throws Error(MonotoneLikelihood) when all events fall
// in one arm, Error(DomainError) when there are none.
HrEstimate estimate_hr(const TrialSnapshot& snapshot);

struct EmpiricalStage {
  std::string label;
  double planned_d = 0.0;
  int d_look = 0;
  double theta_star = 0.0;
  double met_fraction = 0.0;
  double met_std_error = 0.0;
  double mean_log_hr = 0.0;
  double sd_log_hr = 0.0;
  double schoenfeld_sd = 0.0;  // 1 / sqrt(pi (1 - pi) d_look)
  double mean_analysis_time = 0.0;
  int insufficient_events = 0;
  int monotone_likelihood = 0;
};

struct EmpiricalOcs {
  std::vector<EmpiricalStage> stages;
  double all_met_fraction = 0.0;
  double all_met_std_error = 0.0;
  double at_least_one_met_fraction = 0.0;
  double at_least_one_met_std_error = 0.0;
  int replicates = 0;
  std::uint64_t seed = 0;
};

struct EmpiricalOptions {
  unsigned threads = 0;            // 0 = hardware concurrency
  std::ostream* raw_rows = nullptr;  // optional per replicate-stage TSV
};

// Runs `replicates` simulated trials and applies the plan's thresholds at
// event-driven looks (d rounded to the nearest integer).
EmpiricalOcs empirical_ocs(const MonitoringPlan& plan, const TrialScenario& scenario,
                           int replicates, const EmpiricalOptions& options = {});

}  // namespace choose4
