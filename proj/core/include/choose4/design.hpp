#pragma once

// The six-parameter model of a single OS safety analysis.
//
// Two normal-approximation equations tie the parameters together:
//
//   alpha   = Phi( log(theta_star / theta0) * sqrt(pi (1 - pi) d) )
//   1 - beta = Phi( log(theta_star / theta1) * sqrt(pi (1 - pi) d) )
//
// A design fixes any four of {theta0, theta1, d, theta_star, alpha, beta}
// (not all four from one equation) and solves for the remaining two.

#include <array>
#include <initializer_list>
#include <utility>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace choose4 {

enum class Param : std::uint8_t { Theta0, Theta1, Deaths, ThetaStar, Alpha, Beta };

inline constexpr std::array<Param, 6> kAllParams = {
    Param::Theta0, Param::Theta1, Param::Deaths,
    Param::ThetaStar, Param::Alpha, Param::Beta};

std::string_view param_name(Param p) noexcept;
std::optional<Param> param_from_name(std::string_view name) noexcept;

// Small value-type set over the six parameters.
class ParamSet {
 public:
  constexpr ParamSet() = default;
  constexpr ParamSet(std::initializer_list<Param> ps) {
    for (Param p : ps) insert(p);
  }

  constexpr void insert(Param p) { bits_ |= bit(p); }
  constexpr void erase(Param p) { bits_ &= static_cast<std::uint8_t>(~bit(p)); }
  constexpr bool contains(Param p) const { return (bits_ & bit(p)) != 0; }
  constexpr int size() const {
    int n = 0;
    for (Param p : kAllParams) n += contains(p) ? 1 : 0;
    return n;
  }
  constexpr ParamSet complement() const {
    ParamSet out;
    out.bits_ = static_cast<std::uint8_t>(~bits_ & 0x3F);
    return out;
  }
  std::vector<Param> members() const;

  friend constexpr bool operator==(ParamSet, ParamSet) = default;

 private:
  static constexpr std::uint8_t bit(Param p) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(p));
  }
  std::uint8_t bits_ = 0;
};

enum class SolveRoute {
  DirectBoth,              // each unknown sits alone in its own equation
  Eq2ThenEq1,              // power equation first, then the type I error equation
  Eq1ThenEq2,              // type I error equation first, then the power equation
  SimultaneousClosedForm,  // unknowns {d, theta_star}
  Invalid,                 // both unknowns in one equation, the other overdetermined
};

std::string_view to_string(SolveRoute r) noexcept;

struct ChoicePattern {
  ParamSet inputs;
  ParamSet unknowns;
  SolveRoute route = SolveRoute::Invalid;

  bool solvable() const noexcept { return route != SolveRoute::Invalid; }

  static ChoicePattern from_unknowns(Param a, Param b);
  // Throws Error(Arity) unless exactly four inputs are given.
  static ChoicePattern from_inputs(ParamSet inputs);
};

// All 15 ways to pick two unknowns; 13 are solvable.
std::vector<ChoicePattern> enumerate_patterns();

inline constexpr double kDefaultAllocation = 0.5;

struct AnalysisSpec {
  double theta0 = 0.0;
  double theta1 = 0.0;
  double d = 0.0;
  double theta_star = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double pi = kDefaultAllocation;

  double power() const noexcept { return 1.0 - beta; }
  double get(Param p) const noexcept;
  void set(Param p, double value) noexcept;
};

// Exactly four named values.
class ChosenValues {
 public:
  ChosenValues() = default;
  ChosenValues(std::initializer_list<std::pair<Param, double>> init);

  ChosenValues& set(Param p, double value);
  std::optional<double> get(Param p) const noexcept;
  bool has(Param p) const noexcept { return values_[index(p)].has_value(); }
  ParamSet which() const noexcept;
  int count() const noexcept { return which().size(); }

 private:
  static std::size_t index(Param p) noexcept { return static_cast<std::size_t>(p); }
  std::array<std::optional<double>, 6> values_{};
};

enum class RoundingPolicy {
  Exact,           // d stays real-valued; reports round it to an integer
  CeilInteger,     // round d up, hold alpha, re-solve, report achieved beta
  NearestInteger,  // as CeilInteger but rounding to the nearest integer
};

std::string_view to_string(RoundingPolicy r) noexcept;
std::optional<RoundingPolicy> rounding_from_name(std::string_view name) noexcept;

struct Solution {
  AnalysisSpec spec;
  ChoicePattern pattern;
  // Pattern actually used for the final values; differs from `pattern` only
  // when an integer rounding policy turned d into an input.
  ChoicePattern final_pattern;
  RoundingPolicy rounding = RoundingPolicy::Exact;
  std::optional<double> d_exact;  // set whenever d was an unknown
  std::vector<std::string> warnings;
};

// Admissible ranges for designated inputs (open intervals).
struct ParameterDomain {
  static constexpr double kHrMin = 0.01;
  static constexpr double kHrMax = 100.0;
  static constexpr double kProbMin = 1e-4;
  static constexpr double kProbMax = 1.0 - 1e-4;
  static constexpr double kDeathsMax = 1e7;
};

// sqrt(pi (1 - pi) d): the standardising factor of the log-HR statistic.
double information_root(double d, double pi);
double log_hr_std_error(double d, double pi);

double alpha_from(double theta_star, double theta0, double d, double pi = kDefaultAllocation);
double power_from(double theta_star, double theta1, double d, double pi = kDefaultAllocation);
double threshold_from_alpha(double alpha, double theta0, double d, double pi = kDefaultAllocation);
double threshold_from_beta(double beta, double theta1, double d, double pi = kDefaultAllocation);
// Exact real-valued death count separating theta0 from theta1.
double deaths_from(double alpha, double beta, double theta0, double theta1,
                   double pi = kDefaultAllocation);

Solution solve(const ChosenValues& inputs, double pi = kDefaultAllocation,
               RoundingPolicy rounding = RoundingPolicy::Exact);

// Pattern obtained when a solved d is pinned (rounded or observed): d turns
// into an input and beta is released if that stays solvable, else theta_star.
// Patterns where d is already an input are returned unchanged.
ChoicePattern pattern_with_deaths_fixed(const ChoicePattern& pattern);

// Completes `spec` (inputs of `pattern` already set) by solving for the two
// unknowns of `pattern`. Performs no domain checks on the inputs.
AnalysisSpec complete(AnalysisSpec spec, const ChoicePattern& pattern);

}  // namespace choose4
