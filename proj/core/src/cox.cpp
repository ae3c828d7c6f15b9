#include <algorithm>
#include <cmath>
#include <vector>

#include "choose4/error.hpp"
#include "choose4/trial_sim.hpp"

namespace choose4 {

namespace {

// Risk-set summary at one distinct event time.
struct EventTime {
  double at_risk_control = 0.0;
  double at_risk_experimental = 0.0;
  double deaths_control = 0.0;
  double deaths_experimental = 0.0;
};

struct Derivatives {
  double loglik = 0.0;
  double score = 0.0;
  double information = 0.0;
};

Derivatives evaluate(const std::vector<EventTime>& times, double beta) {
  Derivatives out;
  const double hr = std::exp(beta);
  for (const auto& t : times) {
    const double m = t.deaths_control + t.deaths_experimental;
    const double denom = t.at_risk_control + t.at_risk_experimental * hr;
    const double share = t.at_risk_experimental * hr / denom;
    out.loglik += t.deaths_experimental * beta - m * std::log(denom);
    out.score += t.deaths_experimental - m * share;
    out.information += m * share * (1.0 - share);
  }
  return out;
}

}  // namespace

HrEstimate estimate_hr(const TrialSnapshot& snapshot) {
  struct Obs {
    double time;
    bool event;
    bool experimental;
  };
  std::vector<Obs> obs;
  obs.reserve(snapshot.patients.size());
  HrEstimate est;
  for (const auto& p : snapshot.patients) {
    const bool exp = p.arm == Arm::Experimental;
    obs.push_back({p.time, p.event, exp});
    if (p.event) (exp ? est.events_experimental : est.events_control) += 1;
  }
  if (est.events_control + est.events_experimental == 0) {
    fail(ErrorCode::DomainError, "no events in snapshot");
  }
  if (est.events_control == 0 || est.events_experimental == 0) {
    fail(ErrorCode::MonotoneLikelihood,
         "all events fall in one arm; the partial likelihood has no finite maximum");
  }

  // Descending time: the running totals are the risk sets (time >= t).
  std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.time > b.time; });
  std::vector<EventTime> times;
  double risk0 = 0.0, risk1 = 0.0;
  for (std::size_t i = 0; i < obs.size();) {
    std::size_t j = i;
    EventTime et;
    for (; j < obs.size() && obs[j].time == obs[i].time; ++j) {
      (obs[j].experimental ? risk1 : risk0) += 1.0;
      if (obs[j].event) (obs[j].experimental ? et.deaths_experimental : et.deaths_control) += 1.0;
    }
    if (et.deaths_control + et.deaths_experimental > 0.0) {
      et.at_risk_control = risk0;
      et.at_risk_experimental = risk1;
      times.push_back(et);
    }
    i = j;
  }

  // Converged once the score is negligible relative to the event count or
  // the Newton step no longer moves beta.
  const double tol = 1e-10 * (est.events_control + est.events_experimental);
  double beta = 0.0;
  Derivatives cur = evaluate(times, beta);
  bool converged = std::fabs(cur.score) < tol;
  constexpr int kMaxIterations = 100;
  for (int it = 0; it < kMaxIterations && !converged; ++it) {
    est.iterations = it + 1;
    if (!(cur.information > 0.0)) break;
    double step = cur.score / cur.information;
    Derivatives trial = evaluate(times, beta + step);
    // Step halving keeps the (concave) log-likelihood increasing.
    for (int h = 0; h < 30 && trial.loglik < cur.loglik - 1e-12; ++h) {
      step *= 0.5;
      trial = evaluate(times, beta + step);
    }
    beta += step;
    cur = trial;
    converged = std::fabs(cur.score) < tol || std::fabs(step) < 1e-12;
  }
  if (!converged || !(cur.information > 0.0) || !std::isfinite(beta)) {
    fail(ErrorCode::MonotoneLikelihood, "Newton iteration did not converge");
  }
  est.log_hr = beta;
  est.theta_hat = std::exp(beta);
  est.std_error_log_hr = 1.0 / std::sqrt(cur.information);
  return est;
}

}  // namespace choose4
