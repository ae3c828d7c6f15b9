#include "choose4/trial_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include "choose4/error.hpp"
#include "choose4/mvn.hpp"

namespace choose4 {

namespace {

double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Exp(1) draw; 1 - u lies in (0, 1].
double standard_exponential(std::mt19937_64& rng) { return -std::log(1.0 - to_unit(rng())); }

struct StageOutcome {
  double log_hr = 0.0;
  double analysis_time = 0.0;
  bool met = false;
  bool insufficient = false;
  bool monotone = false;
};

}  // namespace

PiecewiseConstant::PiecewiseConstant(std::vector<double> starts, std::vector<double> values)
    : starts_(std::move(starts)), values_(std::move(values)) {
  if (starts_.empty() || starts_.size() != values_.size()) {
    fail(ErrorCode::InvalidScenario, "piecewise function needs matching, non-empty starts and values");
  }
  if (starts_[0] != 0.0) fail(ErrorCode::InvalidScenario, "first segment must start at time 0");
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    if (i > 0 && !(starts_[i] > starts_[i - 1])) {
      fail(ErrorCode::InvalidScenario, "segment start times must be strictly increasing");
    }
    if (!(std::isfinite(values_[i]) && values_[i] > 0.0)) {
      fail(ErrorCode::InvalidScenario, "hazard rates and ratios must be positive");
    }
  }
}

double PiecewiseConstant::at(double t) const noexcept {
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - starts_.begin() - 1));
  return values_[idx];
}

double PiecewiseConstant::cumulative(double t) const noexcept {
  double total = 0.0;
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    if (t <= starts_[i]) break;
    const double end = i + 1 < starts_.size() ? std::min(t, starts_[i + 1]) : t;
    total += values_[i] * (end - starts_[i]);
  }
  return total;
}

double PiecewiseConstant::inverse_cumulative(double target) const noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < starts_.size(); ++i) {
    const double mass = values_[i] * (starts_[i + 1] - starts_[i]);
    if (acc + mass >= target) return starts_[i] + (target - acc) / values_[i];
    acc += mass;
  }
  return starts_.back() + (target - acc) / values_.back();
}

PiecewiseConstant operator*(const PiecewiseConstant& a, const PiecewiseConstant& b) {
  std::vector<double> starts = a.starts_;
  starts.insert(starts.end(), b.starts_.begin(), b.starts_.end());
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  std::vector<double> values;
  values.reserve(starts.size());
  for (double s : starts) values.push_back(a.at(s) * b.at(s));
  return {std::move(starts), std::move(values)};
}

void validate(const TrialScenario& s) {
  if (!(s.pi > 0.0 && s.pi < 1.0)) fail(ErrorCode::InvalidScenario, "pi must lie in (0, 1)");
  const double n_exp = std::nearbyint(s.n * s.pi);
  if (s.n <= 0 || n_exp < 2 || s.n - n_exp < 2) {
    fail(ErrorCode::InvalidScenario, "each arm needs at least 2 patients");
  }
  if (!(s.accrual_duration >= 0.0 && std::isfinite(s.accrual_duration))) {
    fail(ErrorCode::InvalidScenario, "accrual duration must be finite and non-negative");
  }
  if (!(s.censor_rate >= 0.0 && std::isfinite(s.censor_rate))) {
    fail(ErrorCode::InvalidScenario, "censoring rate must be finite and non-negative");
  }
  if (s.control_hazard.values().empty() || s.hazard_ratio.values().empty()) {
    fail(ErrorCode::InvalidScenario, "control hazard and hazard ratio must be specified");
  }
}

EventHistory simulate_trial(const TrialScenario& scenario, std::uint64_t stream) {
  validate(scenario);
  std::mt19937_64 rng(derive_seed(scenario.seed, stream));
  const int n = scenario.n;
  const int n_exp = static_cast<int>(std::nearbyint(n * scenario.pi));
  const PiecewiseConstant experimental = scenario.control_hazard * scenario.hazard_ratio;

  std::vector<Arm> arms(static_cast<std::size_t>(n), Arm::Control);
  std::fill_n(arms.begin(), n_exp, Arm::Experimental);
  for (std::size_t i = arms.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(to_unit(rng()) * static_cast<double>(i + 1));
    std::swap(arms[i], arms[std::min(j, i)]);
  }

  EventHistory h;
  h.patients.reserve(arms.size());
  for (Arm arm : arms) {
    PatientHistory p;
    p.arm = arm;
    p.entry = scenario.accrual_duration * to_unit(rng());
    const auto& hazard = arm == Arm::Experimental ? experimental : scenario.control_hazard;
    p.event_time = hazard.inverse_cumulative(standard_exponential(rng));
    if (scenario.censor_rate > 0.0) p.dropout_time = standard_exponential(rng) / scenario.censor_rate;
    if (p.event_time <= p.dropout_time) h.death_calendar_times.push_back(p.entry + p.event_time);
    h.patients.push_back(p);
  }
  std::sort(h.death_calendar_times.begin(), h.death_calendar_times.end());
  return h;
}

TrialSnapshot snapshot_at_deaths(const EventHistory& history, int d) {
  if (d < 1) fail(ErrorCode::DomainError, "snapshot needs d >= 1");
  TrialSnapshot snap;
  snap.d_requested = d;
  const auto& deaths = history.death_calendar_times;
  if (static_cast<std::size_t>(d) <= deaths.size()) {
    snap.analysis_time = deaths[static_cast<std::size_t>(d) - 1];
  } else {
    snap.insufficient_events = true;
    snap.analysis_time = deaths.empty() ? 0.0 : deaths.back();
  }
  const double t = snap.analysis_time;
  for (const auto& p : history.patients) {
    if (p.entry > t) continue;
    ObservedPatient o;
    o.arm = p.arm;
    o.entry = p.entry;
    // Compare on the calendar scale exactly as death_calendar_times was built.
    o.event = p.event_time <= p.dropout_time && p.entry + p.event_time <= t;
    o.time = o.event ? p.event_time : std::min(p.dropout_time, t - p.entry);
    snap.d_observed += o.event ? 1 : 0;
    snap.patients.push_back(o);
  }
  return snap;
}

EmpiricalOcs empirical_ocs(const MonitoringPlan& plan, const TrialScenario& scenario,
                           int replicates, const EmpiricalOptions& options) {
  validate(scenario);
  if (replicates < 2) fail(ErrorCode::InvalidSettings, "need at least 2 replicates");
  if (plan.stages.empty()) fail(ErrorCode::DomainError, "plan has no stages");

  const std::size_t k = plan.stages.size();
  std::vector<int> looks(k);
  std::vector<double> log_thresholds(k);
  for (std::size_t s = 0; s < k; ++s) {
    looks[s] = std::max(1, static_cast<int>(std::lround(plan.stages[s].spec().d)));
    log_thresholds[s] = std::log(plan.stages[s].spec().theta_star);
    if (looks[s] > scenario.n) {
      fail(ErrorCode::InvalidScenario, "stage " + plan.stages[s].label() +
                                           " needs more deaths than the trial has patients");
    }
  }

  const auto reps = static_cast<std::size_t>(replicates);
  std::vector<StageOutcome> outcomes(reps * k);
  std::atomic<std::size_t> next{0};
  auto replicate_loop = [&] {
    for (std::size_t r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
      const EventHistory history = simulate_trial(scenario, r);
      for (std::size_t s = 0; s < k; ++s) {
        StageOutcome& out = outcomes[r * k + s];
        const TrialSnapshot snap = snapshot_at_deaths(history, looks[s]);
        out.analysis_time = snap.analysis_time;
        out.insufficient = snap.insufficient_events;
        try {
          const HrEstimate est = estimate_hr(snap);
          out.log_hr = est.log_hr;
          out.met = est.log_hr < log_thresholds[s];
        } catch (const Error& e) {
          if (e.code() != ErrorCode::MonotoneLikelihood && e.code() != ErrorCode::DomainError) throw;
          // All events in one arm: the estimate diverges towards 0 (only
          // control deaths) or infinity; the threshold decision is still defined.
          out.monotone = true;
          int exp_events = 0;
          for (const auto& p : snap.patients) exp_events += (p.event && p.arm == Arm::Experimental);
          out.log_hr = exp_events == 0 ? -std::numeric_limits<double>::infinity()
                                       : std::numeric_limits<double>::infinity();
          out.met = exp_events == 0;
        }
      }
    }
  };

  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    try {
      replicate_loop();
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(reps);
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(std::min<std::size_t>(reps, 256)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EmpiricalOcs result;
  result.replicates = replicates;
  result.seed = scenario.seed;
  const double n_reps = static_cast<double>(replicates);
  auto binomial_se = [&](double p) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / n_reps); };

  int all_met = 0, any_met = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    bool all = true, any = false;
    for (std::size_t s = 0; s < k; ++s) {
      all = all && outcomes[r * k + s].met;
      any = any || outcomes[r * k + s].met;
    }
    all_met += all;
    any_met += any;
  }
  result.all_met_fraction = all_met / n_reps;
  result.all_met_std_error = binomial_se(result.all_met_fraction);
  result.at_least_one_met_fraction = any_met / n_reps;
  result.at_least_one_met_std_error = binomial_se(result.at_least_one_met_fraction);

  for (std::size_t s = 0; s < k; ++s) {
    EmpiricalStage st;
    st.label = plan.stages[s].label();
    st.planned_d = plan.stages[s].spec().d;
    st.d_look = looks[s];
    st.theta_star = plan.stages[s].spec().theta_star;
    st.schoenfeld_sd = log_hr_std_error(looks[s], plan.pi);
    int met = 0, finite = 0;
    double sum = 0.0, sumsq = 0.0, time_sum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& o = outcomes[r * k + s];
      met += o.met;
      st.insufficient_events += o.insufficient;
      st.monotone_likelihood += o.monotone;
      time_sum += o.analysis_time;
      if (!o.monotone) {
        ++finite;
        sum += o.log_hr;
        sumsq += o.log_hr * o.log_hr;
      }
    }
    st.met_fraction = met / n_reps;
    st.met_std_error = binomial_se(st.met_fraction);
    st.mean_analysis_time = time_sum / n_reps;
    if (finite > 1) {
      st.mean_log_hr = sum / finite;
      st.sd_log_hr = std::sqrt(std::max(0.0, (sumsq - finite * st.mean_log_hr * st.mean_log_hr) / (finite - 1)));
    }
    result.stages.push_back(st);
  }

  if (options.raw_rows) {
    std::ostream& os = *options.raw_rows;
    os << "replicate\tstage\td\ttheta_hat\tmet_flag\n";
    char buf[64];
    for (std::size_t r = 0; r < reps; ++r) {
      for (std::size_t s = 0; s < k; ++s) {
        const auto& o = outcomes[r * k + s];
        std::snprintf(buf, sizeof buf, "%.17g", std::exp(o.log_hr));
        os << r << '\t' << plan.stages[s].label() << '\t' << looks[s] << '\t' << buf << '\t'
           << (o.met ? 1 : 0) << '\n';
      }
    }
  }
  return result;
}

}  // namespace choose4
