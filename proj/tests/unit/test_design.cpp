#include <gtest/gtest.h>

#include <cmath>

#include "choose4/design.hpp"
#include "choose4/error.hpp"
#include "support/checks.hpp"
#include "support/oracles.hpp"

using namespace choose4;
using P = Param;

namespace {

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::LimitExceeded;
}

}  // namespace

TEST(Information, Examples) {
  EXPECT_NEAR(log_hr_std_error(89, 0.5), 1.0 / std::sqrt(0.25 * 89), 1e-15);
  EXPECT_NEAR(log_hr_std_error(89, 0.5), 0.21200, 5e-6);
  EXPECT_DOUBLE_EQ(log_hr_std_error(4, 0.5), 1.0);
  EXPECT_NEAR(log_hr_std_error(178, 0.5), 0.14991, 5e-6);
  EXPECT_DOUBLE_EQ(information_root(4, 0.5), 1.0);
}

TEST(AlphaFrom, CaseStudy) {
  EXPECT_EQ(round3(alpha_from(1.050, 1.30, 89)), 0.157);
  EXPECT_EQ(round3(alpha_from(1.001, 1.30, 131)), 0.067);
  EXPECT_DOUBLE_EQ(alpha_from(1.3, 1.3, 57), 0.5);
  EXPECT_NEAR(alpha_from(1.05, 1.3, 89), oracle::alpha(1.05, 1.3, 89), 1e-13);
}

TEST(PowerFrom, CaseStudy) {
  EXPECT_EQ(round3(power_from(threshold_from_alpha(0.025, 1.3, 178), 0.80, 178)), 0.900);
  EXPECT_EQ(round3(power_from(0.969, 0.80, 178)), 0.899);  // displayed threshold, not the solved one
  EXPECT_EQ(round3(power_from(0.858, 0.80, 89)), 0.629);
  EXPECT_DOUBLE_EQ(power_from(0.8, 0.8, 300), 0.5);
  EXPECT_NEAR(power_from(0.9, 0.8, 100, 0.3), oracle::power(0.9, 0.8, 100, 0.3), 1e-13);
}

TEST(Thresholds, CaseStudy) {
  EXPECT_EQ(round3(threshold_from_alpha(0.025, 1.30, 178)), 0.969);
  EXPECT_EQ(round3(threshold_from_alpha(0.025, 1.30, 89)), 0.858);
  EXPECT_DOUBLE_EQ(threshold_from_alpha(0.5, 1.30, 77), 1.30);
  EXPECT_EQ(round3(threshold_from_beta(0.1, 0.80, 89)), 1.050);
  EXPECT_EQ(round3(threshold_from_beta(0.1, 0.80, 110)), 1.021);
  EXPECT_DOUBLE_EQ(threshold_from_beta(0.5, 0.80, 77), 0.80);
}

TEST(DeathsFrom, MatchesOracle) {
  const double ia = deaths_from(0.05, 0.1, 1.3, 0.8);
  const double fa = deaths_from(0.025, 0.1, 1.3, 0.8);
  EXPECT_NEAR(ia, oracle::deaths(0.05, 0.1, 1.3, 0.8), 1e-8);
  EXPECT_NEAR(fa, oracle::deaths(0.025, 0.1, 1.3, 0.8), 1e-8);
  EXPECT_EQ(std::lround(ia), 145);
  EXPECT_EQ(std::lround(fa), 178);
  // Ceiling the exact counts gives one more death than the reference sizes.
  EXPECT_EQ(std::ceil(ia), 146);
  EXPECT_EQ(std::ceil(fa), 179);
}

TEST(DeathsFrom, RejectsNonSeparatedHypotheses) {
  EXPECT_EQ(code_of([] { deaths_from(0.05, 0.1, 0.8, 1.3); }), ErrorCode::Infeasible);
  EXPECT_EQ(code_of([] { deaths_from(0.05, 0.1, 1.0, 1.0); }), ErrorCode::Infeasible);
  EXPECT_EQ(code_of([] { deaths_from(0.7, 0.6, 1.3, 0.8); }), ErrorCode::Infeasible);
}

TEST(Patterns, Counts) {
  const auto all = enumerate_patterns();
  ASSERT_EQ(all.size(), 15u);
  int ok = 0;
  for (const auto& p : all) {
    ok += p.solvable();
    EXPECT_EQ(p.inputs.size(), 4);
    EXPECT_EQ(p.unknowns.size(), 2);
    EXPECT_EQ(p.inputs, p.unknowns.complement());
  }
  EXPECT_EQ(ok, 13);
}

TEST(Patterns, Routes) {
  EXPECT_EQ(ChoicePattern::from_unknowns(P::Alpha, P::Beta).route, SolveRoute::DirectBoth);
  EXPECT_EQ(ChoicePattern::from_unknowns(P::Deaths, P::ThetaStar).route, SolveRoute::SimultaneousClosedForm);
  EXPECT_EQ(ChoicePattern::from_unknowns(P::Alpha, P::Theta0).route, SolveRoute::Invalid);
  EXPECT_EQ(ChoicePattern::from_unknowns(P::Beta, P::Theta1).route, SolveRoute::Invalid);
  EXPECT_EQ(ChoicePattern::from_unknowns(P::Alpha, P::Deaths).route, SolveRoute::Eq2ThenEq1);
  EXPECT_EQ(ChoicePattern::from_unknowns(P::Beta, P::ThetaStar).route, SolveRoute::Eq1ThenEq2);
  EXPECT_EQ(ChoicePattern::from_unknowns(P::Theta0, P::Theta1).route, SolveRoute::DirectBoth);
  EXPECT_EQ(code_of([] { ChoicePattern::from_inputs(ParamSet{P::Alpha, P::Beta, P::Deaths}); }),
            ErrorCode::Arity);
}

TEST(Solve, FlemingInterim) {
  const auto s = solve({{P::Deaths, 89}, {P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Beta, 0.1}});
  EXPECT_EQ(round3(s.spec.theta_star), 1.050);
  EXPECT_EQ(round3(s.spec.alpha), 0.157);
  EXPECT_EQ(s.pattern.route, SolveRoute::Eq2ThenEq1);
  EXPECT_TRUE(s.warnings.empty());
  EXPECT_FALSE(s.d_exact);
}

TEST(Solve, FdaInterimRulesOutTheta0) {
  const auto s = solve({{P::Deaths, 89}, {P::Theta1, 0.8}, {P::Alpha, 0.025}, {P::Beta, 0.1}});
  EXPECT_EQ(round3(s.spec.theta_star), 1.050);
  EXPECT_NEAR(s.spec.theta0, 1.59, 0.005);
}

TEST(Solve, RodriguezFinal) {
  const auto s = solve({{P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Alpha, 0.025}, {P::Beta, 0.1}});
  EXPECT_EQ(s.pattern.route, SolveRoute::SimultaneousClosedForm);
  EXPECT_EQ(std::lround(s.spec.d), 178);
  EXPECT_EQ(round3(s.spec.theta_star), 0.969);
  ASSERT_TRUE(s.d_exact);
  EXPECT_EQ(*s.d_exact, s.spec.d);
  EXPECT_EQ(s.rounding, RoundingPolicy::Exact);
}

TEST(Solve, CeilingRoundingKeepsAlphaAndReleasesBeta) {
  const ChosenValues in{{P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Alpha, 0.05}, {P::Beta, 0.1}};
  const auto s = solve(in, 0.5, RoundingPolicy::CeilInteger);
  EXPECT_EQ(s.spec.d, 146.0);
  EXPECT_EQ(s.spec.alpha, 0.05);
  EXPECT_LT(s.spec.beta, 0.1);
  EXPECT_NEAR(*s.d_exact, oracle::deaths(0.05, 0.1, 1.3, 0.8), 1e-8);
  EXPECT_TRUE(s.final_pattern.unknowns == (ParamSet{P::ThetaStar, P::Beta}));
  EXPECT_FALSE(s.warnings.empty());
  const auto n = solve(in, 0.5, RoundingPolicy::NearestInteger);
  EXPECT_EQ(n.spec.d, 145.0);
  EXPECT_GT(n.spec.beta, 0.1);
}

TEST(Solve, DeathsPinningRule) {
  auto pinned = [](Param a, Param b) {
    return pattern_with_deaths_fixed(ChoicePattern::from_unknowns(a, b)).unknowns;
  };
  EXPECT_EQ(pinned(P::Deaths, P::ThetaStar), (ParamSet{P::ThetaStar, P::Beta}));
  EXPECT_EQ(pinned(P::Alpha, P::Deaths), (ParamSet{P::Alpha, P::Beta}));
  EXPECT_EQ(pinned(P::Beta, P::Deaths), (ParamSet{P::Beta, P::ThetaStar}));
  EXPECT_EQ(pinned(P::Theta0, P::Deaths), (ParamSet{P::Theta0, P::Beta}));
  EXPECT_EQ(pinned(P::Theta1, P::Deaths), (ParamSet{P::Theta1, P::ThetaStar}));
  EXPECT_EQ(pinned(P::Alpha, P::Beta), (ParamSet{P::Alpha, P::Beta}));
}

TEST(Solve, NearDegenerateHypothesesGiveLargeDeaths) {
  const auto s = solve({{P::Theta0, 0.8 * 1.0001}, {P::Theta1, 0.8}, {P::Alpha, 0.025}, {P::Beta, 0.1}});
  EXPECT_GT(s.spec.d, 1e8);
  EXPECT_TRUE(std::isfinite(s.spec.d));
  EXPECT_FALSE(s.warnings.empty());
}

TEST(Solve, Errors) {
  EXPECT_EQ(code_of([] { solve({{P::Theta1, 0.8}, {P::Deaths, 89}, {P::ThetaStar, 1.0}, {P::Beta, 0.1}}); }),
            ErrorCode::InvalidPattern);
  EXPECT_EQ(code_of([] { solve({{P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Beta, 0.1}}); }), ErrorCode::Arity);
  EXPECT_EQ(code_of([] { ChosenValues v{{P::Theta0, 1.3}, {P::Theta0, 1.2}}; }), ErrorCode::Arity);
  EXPECT_EQ(code_of([] { solve({{P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Deaths, 89}, {P::Alpha, 1.5}}); }),
            ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { solve({{P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Deaths, -3}, {P::Alpha, 0.1}}); }),
            ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { solve({{P::Theta0, 0.8}, {P::Theta1, 1.3}, {P::Alpha, 0.05}, {P::Beta, 0.1}}); }),
            ErrorCode::Infeasible);
  EXPECT_EQ(code_of([] { solve({{P::Theta0, 0.8}, {P::Theta1, 1.3}, {P::Deaths, 89}, {P::Beta, 0.1}}); }),
            ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { solve({{P::Theta0, 1.3}, {P::Theta1, 0.8}, {P::Deaths, 89}, {P::Beta, 0.1}}, 1.0); }),
            ErrorCode::DomainError);
}

TEST(Monotonicity, AlphaAndPower) {
  for (double d : {20.0, 89.0, 400.0}) {
    double prev_a = -1, prev_p = -1;
    for (double t = 0.6; t < 1.6; t += 0.01) {
      const double a = alpha_from(t, 1.3, d), p = power_from(t, 0.8, d);
      EXPECT_GT(a, prev_a);
      EXPECT_GT(p, prev_p);
      prev_a = a;
      prev_p = p;
    }
    double prev = 2.0;
    for (double t0 = 1.0; t0 < 2.0; t0 += 0.01) {
      const double a = alpha_from(1.0, t0, d);
      EXPECT_LT(a, prev);
      prev = a;
    }
  }
  double prev = 0.0;
  for (double d = 10; d < 1000; d += 7) {
    const double p = power_from(0.95, 0.8, d);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(Properties, RoundTripAllSolvablePatterns) {
  const auto r = checks::roundtrip(2600, 11);
  EXPECT_TRUE(r.ok()) << r.failures << " failures; first: " << r.first_failure;
}

TEST(Properties, InvalidPatternsAlwaysRaise) {
  const auto r = checks::invalid_patterns_raise(500, 12);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Properties, RescalingInvariance) {
  const auto r = checks::rescaling(300, 13);
  EXPECT_TRUE(r.ok()) << r.failures << " failures; first: " << r.first_failure;
  EXPECT_NEAR(alpha_from(1.05 * 3.7, 1.3 * 3.7, 89), alpha_from(1.05, 1.3, 89), 1e-12);
  EXPECT_NEAR(power_from(0.9 * 0.2, 0.8 * 0.2, 89), power_from(0.9, 0.8, 89), 1e-12);
}

TEST(Properties, AllocationSymmetry) {
  const auto r = checks::allocation_symmetry(300, 14);
  EXPECT_TRUE(r.ok()) << r.failures << " failures; first: " << r.first_failure;
}
