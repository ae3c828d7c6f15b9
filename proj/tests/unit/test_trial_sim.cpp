#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "choose4/error.hpp"
#include "choose4/trial_sim.hpp"
#include "support/oracles.hpp"
#include "support/table1.hpp"

using namespace choose4;
using P = Param;

namespace {

TrialScenario exponential(int n, double median, double hr, std::uint64_t seed = 5) {
  TrialScenario s;
  s.n = n;
  s.accrual_duration = 12.0;
  s.control_hazard = PiecewiseConstant::constant(std::numbers::ln2 / median);
  s.hazard_ratio = PiecewiseConstant::constant(hr);
  s.seed = seed;
  return s;
}

double median_event_time(const EventHistory& h, Arm arm) {
  std::vector<double> t;
  for (const auto& p : h.patients) {
    if (p.arm == arm) t.push_back(p.event_time);
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

}  // namespace

TEST(Piecewise, Validation) {
  EXPECT_THROW(PiecewiseConstant({1.0}, {0.1}), Error);
  EXPECT_THROW(PiecewiseConstant({0.0, 2.0, 2.0}, {0.1, 0.2, 0.3}), Error);
  EXPECT_THROW(PiecewiseConstant({0.0}, {0.0}), Error);
  EXPECT_THROW(PiecewiseConstant({0.0, 1.0}, {0.1}), Error);
}

TEST(Piecewise, CumulativeAndInverse) {
  const PiecewiseConstant h({0.0, 6.0, 10.0}, {0.1, 0.05, 0.2});
  EXPECT_DOUBLE_EQ(h.at(5.9), 0.1);
  EXPECT_DOUBLE_EQ(h.at(6.0), 0.05);
  EXPECT_DOUBLE_EQ(h.cumulative(6.0), 0.6);
  EXPECT_DOUBLE_EQ(h.cumulative(12.0), 0.6 + 0.2 + 0.4);
  EXPECT_NEAR(std::exp(-h.cumulative(7.5)), oracle::piecewise_survival({0, 6, 10}, {0.1, 0.05, 0.2}, 7.5), 1e-15);
  for (double t : {0.0, 0.3, 6.0, 8.0, 10.0, 25.0}) EXPECT_NEAR(h.inverse_cumulative(h.cumulative(t)), t, 1e-12);
}

TEST(Piecewise, Product) {
  const PiecewiseConstant a({0.0, 6.0}, {0.1, 0.2});
  const PiecewiseConstant b({0.0, 3.0}, {1.0, 0.5});
  const auto p = a * b;
  ASSERT_EQ(p.starts().size(), 3u);
  EXPECT_DOUBLE_EQ(p.at(1.0), 0.1);
  EXPECT_DOUBLE_EQ(p.at(4.0), 0.05);
  EXPECT_DOUBLE_EQ(p.at(7.0), 0.1);
}

TEST(Simulate, ExactAllocationAndEntries) {
  auto s = exponential(101, 12, 1.0);
  s.pi = 0.3;
  const auto h = simulate_trial(s, 0);
  const auto exp = std::count_if(h.patients.begin(), h.patients.end(),
                                 [](const PatientHistory& p) { return p.arm == Arm::Experimental; });
  EXPECT_EQ(exp, 30);
  for (const auto& p : h.patients) {
    EXPECT_GE(p.entry, 0.0);
    EXPECT_LE(p.entry, 12.0);
  }
  EXPECT_EQ(h.death_calendar_times.size(), 101u);
  EXPECT_TRUE(std::is_sorted(h.death_calendar_times.begin(), h.death_calendar_times.end()));
}

TEST(Simulate, MedianRatioUnderExponentialHazards) {
  const auto h = simulate_trial(exponential(100000, 12.0, 0.8), 0);
  const double mc = median_event_time(h, Arm::Control);
  const double me = median_event_time(h, Arm::Experimental);
  EXPECT_NEAR(mc, 12.0, 0.3);
  EXPECT_NEAR(me, 15.0, 0.4);
  EXPECT_NEAR(me / mc, 1.25, 0.04);
}

TEST(Simulate, DelayedEffectSurvivalMatchesClosedForm) {
  TrialScenario s;
  s.n = 100000;
  s.control_hazard = PiecewiseConstant::constant(0.05);
  s.hazard_ratio = PiecewiseConstant({0.0, 6.0}, {1.0, 0.7});
  s.seed = 9;
  const auto h = simulate_trial(s, 0);
  for (Arm arm : {Arm::Control, Arm::Experimental}) {
    int n = 0, alive = 0;
    for (const auto& p : h.patients) {
      if (p.arm != arm) continue;
      ++n;
      alive += p.event_time > 12.0;
    }
    const double expect = arm == Arm::Control ? oracle::piecewise_survival({0}, {0.05}, 12)
                                              : oracle::piecewise_survival({0, 6}, {0.05, 0.035}, 12);
    const double se = std::sqrt(expect * (1 - expect) / n);
    EXPECT_NEAR(static_cast<double>(alive) / n, expect, 4 * se);
  }
}

TEST(Simulate, NullArmsExchangeable) {
  const auto h = simulate_trial(exponential(40000, 10, 1.0), 3);
  double sum[2] = {0, 0};
  int n[2] = {0, 0};
  for (const auto& p : h.patients) {
    const int a = static_cast<int>(p.arm);
    sum[a] += p.event_time;
    ++n[a];
  }
  const double se = 10.0 * std::sqrt(1.0 / n[0] + 1.0 / n[1]);
  EXPECT_NEAR(sum[0] / n[0] - sum[1] / n[1], 0.0, 4 * se);
}

TEST(Simulate, Dropout) {
  auto s = exponential(20000, 12, 1.0);
  s.censor_rate = std::numbers::ln2 / 12;
  const auto h = simulate_trial(s, 0);
  EXPECT_NEAR(static_cast<double>(h.death_calendar_times.size()) / 20000, 0.5, 0.02);
}

TEST(Simulate, StreamsAreReproducible) {
  const auto s = exponential(500, 12, 0.8);
  const auto a = simulate_trial(s, 7);
  const auto b = simulate_trial(s, 7);
  const auto c = simulate_trial(s, 8);
  ASSERT_EQ(a.death_calendar_times, b.death_calendar_times);
  EXPECT_NE(a.death_calendar_times, c.death_calendar_times);
}

TEST(Snapshot, EventCounts) {
  const auto h = simulate_trial(exponential(1000, 12, 0.8), 0);
  const int total = static_cast<int>(h.death_calendar_times.size());
  const auto full = snapshot_at_deaths(h, total);
  EXPECT_EQ(full.d_observed, total);
  EXPECT_FALSE(full.insufficient_events);
  const auto one = snapshot_at_deaths(h, 1);
  EXPECT_EQ(one.d_observed, 1);
  const auto s89 = snapshot_at_deaths(h, 89);
  EXPECT_EQ(s89.d_observed, 89);
  EXPECT_EQ(s89.analysis_time, h.death_calendar_times[88]);
  for (const auto& p : s89.patients) {
    EXPECT_LE(p.entry, s89.analysis_time);
    EXPECT_LE(p.entry + p.time, s89.analysis_time + 1e-12);
  }
  auto censored = exponential(50, 12, 0.8);
  censored.censor_rate = 1.0;
  const auto few = simulate_trial(censored, 0);
  const auto over = snapshot_at_deaths(few, 50);
  EXPECT_TRUE(over.insufficient_events);
  EXPECT_LT(over.d_observed, 50);
  EXPECT_THROW(snapshot_at_deaths(h, 0), Error);
}

TEST(Empirical, NullMedianThreshold) {
  const auto plan = build_plan(
      Strategy::Custom, {{"only", {{P::Deaths, 100}, {P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::ThetaStar, 1.0}}}});
  const auto r = empirical_ocs(plan, exponential(400, 12, 1.0), 4000);
  EXPECT_NEAR(r.stages[0].met_fraction, 0.5, 3 * r.stages[0].met_std_error);
  EXPECT_NEAR(r.stages[0].sd_log_hr, r.stages[0].schoenfeld_sd, 0.05 * r.stages[0].schoenfeld_sd);
}

TEST(Empirical, ThreadCountDoesNotChangeResults) {
  const auto plan = table1::plan("strategy1-fleming");
  auto s = exponential(400, 12, 0.8);
  std::ostringstream one, many;
  EmpiricalOptions o1{1, &one}, o4{4, &many};
  const auto a = empirical_ocs(plan, s, 60, o1);
  const auto b = empirical_ocs(plan, s, 60, o4);
  EXPECT_EQ(a.all_met_fraction, b.all_met_fraction);
  EXPECT_EQ(a.stages[2].mean_log_hr, b.stages[2].mean_log_hr);
  EXPECT_EQ(one.str(), many.str());
  EXPECT_EQ(one.str().substr(0, one.str().find('\n')), "replicate\tstage\td\ttheta_hat\tmet_flag");
  std::size_t rows = 0;
  for (char c : one.str()) rows += c == '\n';
  EXPECT_EQ(rows, 1u + 60u * 4u);
}

TEST(Empirical, RejectsLooksBeyondSampleSize) {
  const auto plan = table1::plan("strategy1-fleming");
  EXPECT_THROW(empirical_ocs(plan, exponential(150, 12, 0.8), 10), Error);
  EXPECT_THROW(empirical_ocs(plan, exponential(400, 12, 0.8), 1), Error);
}
