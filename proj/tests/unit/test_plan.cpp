#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "choose4/error.hpp"
#include "choose4/plan.hpp"
#include "support/checks.hpp"
#include "support/oracles.hpp"
#include "support/table1.hpp"

using namespace choose4;
using P = Param;

namespace {

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

ChoiceSpec fleming_ia(std::string label, double d) {
  return {std::move(label), {{P::Deaths, d}, {P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Beta, 0.1}}};
}
ChoiceSpec fa_178() {
  return {"FA", {{P::Deaths, 178}, {P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Alpha, 0.025}}};
}
ChoiceSpec fda_ia(std::string label, double d) {
  return {std::move(label), {{P::Deaths, d}, {P::Theta1, 0.8}, {P::Alpha, 0.025}, {P::Beta, 0.1}}};
}

bool bits_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(Templates, SixWithRequiredPatterns) {
  const auto& t = strategy_templates();
  ASSERT_EQ(t.size(), 6u);
  EXPECT_EQ(t.back().strategy, Strategy::Custom);
  EXPECT_EQ(strategy_template(Strategy::Fleming).interim_unknowns->complement(),
            (ParamSet{P::Theta0, P::Theta1, P::Beta, P::Deaths}));
  EXPECT_EQ(strategy_template(Strategy::FdaT2D).interim_unknowns->complement(),
            (ParamSet{P::Theta1, P::Alpha, P::Beta, P::Deaths}));
  EXPECT_EQ(strategy_template(Strategy::Rodriguez).final_unknowns, (ParamSet{P::Deaths, P::ThetaStar}));
  for (auto s : {Strategy::Fleming, Strategy::Rodriguez, Strategy::StandardCI, Strategy::DiscreteThreshold,
                 Strategy::FdaT2D, Strategy::Custom}) {
    EXPECT_EQ(strategy_from_name(to_string(s)), s);
  }
}

TEST(BuildPlan, FlemingThresholds) {
  const auto plan = build_plan(Strategy::Fleming, {fleming_ia("IA1", 89), fleming_ia("IA2", 110),
                                                   fleming_ia("IA3", 131), fa_178()});
  const double expect[] = {1.050, 1.021, 1.001, 0.969};
  ASSERT_EQ(plan.stages.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(round3(plan.thresholds()[i]), expect[i]);
}

TEST(BuildPlan, StagesSortedByDeaths) {
  const auto plan = build_plan(Strategy::Fleming, {fa_178(), fleming_ia("IA2", 110), fleming_ia("IA1", 89)});
  EXPECT_EQ(plan.stages.front().label(), "IA1");
  EXPECT_EQ(plan.stages.back().label(), "FA");
}

TEST(BuildPlan, FdaRulesOutDecreasingTheta0) {
  const auto plan = build_plan(Strategy::FdaT2D, {fda_ia("IA1", 89), fda_ia("IA2", 110), fda_ia("IA3", 131), fa_178()});
  const double expect[] = {1.59, 1.48, 1.41, 1.30};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(plan.stages[i].spec().theta0, expect[i], 0.005);
}

TEST(BuildPlan, FlemingAndFdaThresholdsBitwiseIdentical) {
  const auto a = build_plan(Strategy::Fleming, {fleming_ia("IA1", 89), fleming_ia("IA2", 110), fleming_ia("IA3", 131), fa_178()});
  const auto b = build_plan(Strategy::FdaT2D, {fda_ia("IA1", 89), fda_ia("IA2", 110), fda_ia("IA3", 131), fa_178()});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(bits_equal(a.thresholds()[i], b.thresholds()[i])) << i;
}

TEST(BuildPlan, RodriguezAlphaRecomputes) {
  const auto plan = table1::plan("strategy2-rodriguez");
  for (const auto& st : plan.stages) {
    const auto& s = st.spec();
    EXPECT_NEAR(alpha_from(s.theta_star, s.theta0, s.d), s.alpha, 1e-12);
    EXPECT_NEAR(power_from(s.theta_star, s.theta1, s.d), 0.9, 1e-12);
  }
  EXPECT_EQ(std::lround(plan.stages[0].spec().d), 145);
  EXPECT_EQ(std::lround(plan.stages[1].spec().d), 178);
}

TEST(BuildPlan, SingleStageCustom) {
  const auto plan = build_plan(Strategy::Custom, {fleming_ia("only", 100)});
  ASSERT_EQ(plan.stages.size(), 1u);
  const auto t = plan_table(plan);
  EXPECT_EQ(t.rows[0].alpha.source, ProbabilitySource::ClosedForm);
}

TEST(BuildPlan, Errors) {
  auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::LimitExceeded;
  };
  EXPECT_EQ(code([] { build_plan(Strategy::Fleming, {fleming_ia("A", 89), fleming_ia("B", 89), fa_178()}); }),
            ErrorCode::NonmonotoneDeaths);
  EXPECT_EQ(code([] { build_plan(Strategy::Fleming, {fleming_ia("IA1", 89), fleming_ia("FA", 178)}); }),
            ErrorCode::PatternMismatch);
  EXPECT_EQ(code([] { build_plan(Strategy::Custom, {fleming_ia("X", 89), fleming_ia("X", 100)}); }),
            ErrorCode::DomainError);
  EXPECT_EQ(code([] { build_plan(Strategy::Custom, {}); }), ErrorCode::DomainError);
  const auto invalid = [] {
    build_plan(Strategy::Custom,
               {{"IA", {{P::Theta1, 0.8}, {P::Deaths, 89}, {P::ThetaStar, 1.0}, {P::Beta, 0.1}}}});
  };
  EXPECT_EQ(code(invalid), ErrorCode::InvalidPattern);
}

TEST(Observed, RecomputeAtObservedDeaths) {
  const auto plan = build_plan(Strategy::Custom, {fleming_ia("IA1", 89)});
  EXPECT_EQ(round3(recompute_for_observed(plan, "IA1", 89).spec.theta_star), 1.050);
  EXPECT_NEAR(recompute_for_observed(plan, "IA1", 60).spec.theta_star,
              0.8 * std::exp(oracle::quantile(0.9) / std::sqrt(15.0)), 1e-10);
  EXPECT_NEAR(recompute_for_observed(plan, "IA1", 2000).spec.theta_star, 0.8 * std::exp(oracle::quantile(0.9) / std::sqrt(500.0)), 1e-10);
}

TEST(Observed, SolvedDeathsArePinned) {
  const auto plan = table1::plan("strategy2-rodriguez");
  const auto s = recompute_for_observed(plan, "IA", 150);
  EXPECT_EQ(s.spec.d, 150);
  EXPECT_EQ(s.spec.alpha, 0.05);
  EXPECT_EQ(s.final_pattern.unknowns, (ParamSet{P::ThetaStar, P::Beta}));
  const auto moved = with_observed_deaths(plan, {{"IA", 150}});
  EXPECT_EQ(moved.stage("IA").spec().d, 150);
  ASSERT_TRUE(moved.stage("IA").planned_d);
  EXPECT_NEAR(*moved.stage("IA").planned_d, 145.32, 0.01);
}

TEST(Discrete, GridRounding) {
  EXPECT_DOUBLE_EQ(round_up_to_grid(1.05, 0.05), 1.05);
  EXPECT_DOUBLE_EQ(round_up_to_grid(1.021, 0.05), 1.05);
  EXPECT_DOUBLE_EQ(round_up_to_grid(0.969, 0.05), 1.0);
  EXPECT_DOUBLE_EQ(round_up_to_grid(0.951, 0.05), 1.0);
  EXPECT_NEAR(round_up_to_grid(0.94, 0.05), 0.95, 1e-15);
  EXPECT_GE(round_up_to_grid(1.0497, 0.05), 1.0497);
}

TEST(Discrete, CaseStudyPoints) {
  const auto a = discrete_approximation(fleming_ia("IA", 89), 0.5, 89, 110);
  EXPECT_DOUBLE_EQ(a.points.front().discrete_theta_star, 1.05);
  const auto& p110 = a.points.back();
  EXPECT_DOUBLE_EQ(p110.discrete_theta_star, 1.05);
  EXPECT_GT(p110.discrete_power, 0.9);
  EXPECT_GT(p110.discrete_alpha, 0.103);
  EXPECT_NEAR(p110.discrete_alpha, oracle::alpha(1.05, 1.3, 110), 1e-12);
  const auto fa = discrete_approximation(fa_178(), 0.5, 178, 178);
  EXPECT_DOUBLE_EQ(fa.points[0].discrete_theta_star, 1.0);
  EXPECT_EQ(round3(fa.points[0].discrete_alpha), 0.040);
}

TEST(Discrete, StepsMergeAndCap) {
  const auto a = discrete_approximation(fleming_ia("IA", 89), 0.5, 40, 200, 0.05, 0.2);
  ASSERT_FALSE(a.steps.empty());
  EXPECT_EQ(a.steps.front().d_from, 40);
  EXPECT_EQ(a.steps.back().d_to, 200);
  for (std::size_t i = 1; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].d_from, a.steps[i - 1].d_to + 1);
    EXPECT_LT(a.steps[i].theta_star, a.steps[i - 1].theta_star);
  }
  EXPECT_TRUE(a.steps.front().alpha_cap_exceeded);
  EXPECT_FALSE(a.steps.back().alpha_cap_exceeded);
}

TEST(Discrete, Figure1Properties) {
  const auto r = checks::figure1();
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(CaseStudy, Strategy4And3B) {
  const auto s4 = table1::plan("strategy4-discrete");
  const double a4[] = {0.215, 0.131, 0.067, 0.040};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(round3(s4.stages[i].spec().alpha), a4[i]);
  const auto s3b = table1::plan("strategy3b-standard-ci");
  const double t3b[] = {1.044, 1.018, 0.975, 0.969};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(round3(s3b.stages[i].spec().theta_star), t3b[i]);
}
