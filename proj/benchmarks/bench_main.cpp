#include <benchmark/benchmark.h>

#include <numbers>

#include "choose4/design.hpp"
#include "choose4/joint_ocs.hpp"
#include "choose4/plan.hpp"
#include "choose4/trial_sim.hpp"

using namespace choose4;
using P = Param;

namespace {

MonitoringPlan fleming() {
  auto ia = [](std::string l, double d) {
    return ChoiceSpec{std::move(l), {{P::Deaths, d}, {P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Beta, 0.1}}};
  };
  return build_plan(Strategy::Fleming,
                    {ia("IA1", 89), ia("IA2", 110), ia("IA3", 131),
                     {"FA", {{P::Deaths, 178}, {P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Alpha, 0.025}}}});
}

TrialScenario scenario(int n) {
  TrialScenario s;
  s.n = n;
  s.accrual_duration = 24.0;
  s.control_hazard = PiecewiseConstant::constant(std::numbers::ln2 / 12.0);
  s.hazard_ratio = PiecewiseConstant::constant(0.8);
  return s;
}

void BM_SolveSimultaneous(benchmark::State& state) {
  const ChosenValues in{{P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Alpha, 0.05}, {P::Beta, 0.1}};
  for (auto _ : state) benchmark::DoNotOptimize(solve(in));
}
BENCHMARK(BM_SolveSimultaneous);

void BM_SolveInterim(benchmark::State& state) {
  const ChosenValues in{{P::Deaths, 89}, {P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Beta, 0.1}};
  for (auto _ : state) benchmark::DoNotOptimize(solve(in));
}
BENCHMARK(BM_SolveInterim);

void BM_AllMet(benchmark::State& state) {
  const auto plan = fleming();
  IntegrationSettings s;
  s.samples = static_cast<std::uint64_t>(state.range(0));
  s.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(prob_all_met(plan, 1.3, s));
}
BENCHMARK(BM_AllMet)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_CoxEstimate(benchmark::State& state) {
  const auto h = simulate_trial(scenario(static_cast<int>(state.range(0))), 0);
  const auto snap = snapshot_at_deaths(h, static_cast<int>(state.range(0)) / 5);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_hr(snap));
}
BENCHMARK(BM_CoxEstimate)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_SimulateTrial(benchmark::State& state) {
  const auto s = scenario(1000);
  std::uint64_t rep = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_trial(s, rep++));
}
BENCHMARK(BM_SimulateTrial)->Unit(benchmark::kMicrosecond);

void BM_EmpiricalOcs(benchmark::State& state) {
  const auto plan = fleming();
  const auto s = scenario(1000);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_ocs(plan, s, 200, {1, nullptr}));
}
BENCHMARK(BM_EmpiricalOcs)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
