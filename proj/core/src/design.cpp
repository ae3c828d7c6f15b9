#include "choose4/design.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "choose4/error.hpp"
#include "choose4/normal.hpp"

namespace choose4 {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void require_positive(double v, std::string_view what) {
  if (!(std::isfinite(v) && v > 0.0)) {
    fail(ErrorCode::DomainError, std::string(what) + " must be a positive finite number, got " + num(v));
  }
}

void require_allocation(double pi) {
  if (!(pi > 0.0 && pi < 1.0)) {
    fail(ErrorCode::DomainError, "allocation fraction pi must lie in (0, 1), got " + num(pi));
  }
}

void require_probability(double p, std::string_view what) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorCode::DomainError, std::string(what) + " must lie in (0, 1), got " + num(p));
  }
}

bool in_equation1(Param p) {
  return p == Param::Theta0 || p == Param::Deaths || p == Param::ThetaStar || p == Param::Alpha;
}
bool in_equation2(Param p) {
  return p == Param::Theta1 || p == Param::Deaths || p == Param::ThetaStar || p == Param::Beta;
}

SolveRoute classify(Param a, Param b) {
  const ParamSet u{a, b};
  if (u == ParamSet{Param::Deaths, Param::ThetaStar}) return SolveRoute::SimultaneousClosedForm;
  // Unknowns private to one equation ({alpha, theta0} or {beta, theta1})
  // leave that equation underdetermined and the other overdetermined.
  const bool only1 = !in_equation2(a) && !in_equation2(b);
  const bool only2 = !in_equation1(a) && !in_equation1(b);
  if (only1 || only2) return SolveRoute::Invalid;
  const bool shared = u.contains(Param::Deaths) || u.contains(Param::ThetaStar);
  if (!shared) return SolveRoute::DirectBoth;
  // One unknown is shared (d or theta_star); the equation holding the other
  // unknown cannot determine it, so the shared one comes from the other side.
  const Param other = (a == Param::Deaths || a == Param::ThetaStar) ? b : a;
  return in_equation1(other) ? SolveRoute::Eq2ThenEq1 : SolveRoute::Eq1ThenEq2;
}

// d satisfying Phi(log_ratio * sqrt(pi(1-pi)d)) = Phi(z).
double deaths_from_single_equation(double z, double log_ratio, double pi, std::string_view eq) {
  if (z == 0.0 && log_ratio == 0.0) {
    fail(ErrorCode::Infeasible,
         std::string(eq) + " holds for every d (threshold equals the hypothesised HR at probability 0.5)");
  }
  if (!(z * log_ratio > 0.0)) {
    fail(ErrorCode::Infeasible,
         std::string(eq) + " has no positive solution for d: threshold lies on the wrong side of the hypothesised HR");
  }
  const double root = z / log_ratio;
  return root * root / (pi * (1.0 - pi));
}

void check_input_domain(Param p, double v) {
  const auto name = std::string(param_name(p));
  switch (p) {
    case Param::Theta0:
    case Param::Theta1:
    case Param::ThetaStar:
      if (!(v > ParameterDomain::kHrMin && v < ParameterDomain::kHrMax)) {
        fail(ErrorCode::DomainError, name + " must lie in (0.01, 100), got " + num(v));
      }
      break;
    case Param::Alpha:
    case Param::Beta:
      if (!(v > ParameterDomain::kProbMin && v < ParameterDomain::kProbMax)) {
        fail(ErrorCode::DomainError, name + " must lie in (0.0001, 0.9999), got " + num(v));
      }
      break;
    case Param::Deaths:
      if (!(v > 0.0 && v < ParameterDomain::kDeathsMax)) {
        fail(ErrorCode::DomainError, name + " must lie in (0, 1e7), got " + num(v));
      }
      break;
  }
}

std::optional<std::string> output_domain_warning(Param p, double v) {
  const auto name = std::string(param_name(p));
  switch (p) {
    case Param::Theta0:
    case Param::Theta1:
    case Param::ThetaStar:
      if (!(v > ParameterDomain::kHrMin && v < ParameterDomain::kHrMax)) {
        return "solved " + name + " = " + num(v) + " lies outside (0.01, 100)";
      }
      break;
    case Param::Alpha:
    case Param::Beta:
      if (!(v > ParameterDomain::kProbMin && v < ParameterDomain::kProbMax)) {
        return "solved " + name + " = " + num(v) + " lies outside (0.0001, 0.9999)";
      }
      break;
    case Param::Deaths:
      if (!(v < ParameterDomain::kDeathsMax)) {
        return "solved d = " + num(v) + " exceeds 1e7";
      }
      break;
  }
  return std::nullopt;
}

// Fills the two unknowns of `spec` in place. Inputs must already be set.
void solve_in_place(AnalysisSpec& s, const ChoicePattern& pattern) {
  const double pi = s.pi;
  const ParamSet u = pattern.unknowns;
  auto theta0_from_alpha = [&] {
    s.theta0 = s.theta_star * std::exp(-normal_quantile(s.alpha) / information_root(s.d, pi));
  };
  auto theta1_from_beta = [&] {
    s.theta1 = s.theta_star * std::exp(-normal_quantile(1.0 - s.beta) / information_root(s.d, pi));
  };
  auto alpha_eq = [&] { s.alpha = alpha_from(s.theta_star, s.theta0, s.d, pi); };
  auto beta_eq = [&] { s.beta = 1.0 - power_from(s.theta_star, s.theta1, s.d, pi); };

  if (u == ParamSet{Param::Deaths, Param::ThetaStar}) {
    s.d = deaths_from(s.alpha, s.beta, s.theta0, s.theta1, pi);
    s.theta_star = threshold_from_alpha(s.alpha, s.theta0, s.d, pi);
    return;
  }

  // Shared unknown first (d or theta_star), from the equation that owns the
  // non-shared unknown's complement.
  if (u.contains(Param::ThetaStar)) {
    if (pattern.route == SolveRoute::Eq2ThenEq1) {
      s.theta_star = threshold_from_beta(s.beta, s.theta1, s.d, pi);
    } else {
      s.theta_star = threshold_from_alpha(s.alpha, s.theta0, s.d, pi);
    }
  } else if (u.contains(Param::Deaths)) {
    if (pattern.route == SolveRoute::Eq2ThenEq1) {
      s.d = deaths_from_single_equation(normal_quantile(1.0 - s.beta),
                                        std::log(s.theta_star / s.theta1), pi, "power equation");
    } else {
      s.d = deaths_from_single_equation(normal_quantile(s.alpha),
                                        std::log(s.theta_star / s.theta0), pi, "type I error equation");
    }
  }

  if (u.contains(Param::Alpha)) alpha_eq();
  if (u.contains(Param::Beta)) beta_eq();
  if (u.contains(Param::Theta0)) theta0_from_alpha();
  if (u.contains(Param::Theta1)) theta1_from_beta();
}

// After d is rounded it becomes an input; the freed slot goes to beta when
// that keeps the pattern solvable, otherwise to theta_star. Alpha, when
// chosen, is therefore never released.
ChoicePattern pattern_after_rounding(const ChoicePattern& original) {
  if (!original.unknowns.contains(Param::Deaths)) return original;
  const auto members = original.unknowns.members();
  const Param other = members[0] == Param::Deaths ? members[1] : members[0];
  if (other != Param::Beta) {
    auto p = ChoicePattern::from_unknowns(other, Param::Beta);
    if (p.solvable()) return p;
  }
  return ChoicePattern::from_unknowns(other, Param::ThetaStar);
}

}  // namespace

std::string_view param_name(Param p) noexcept {
  switch (p) {
    case Param::Theta0: return "theta0";
    case Param::Theta1: return "theta1";
    case Param::Deaths: return "d";
    case Param::ThetaStar: return "theta_star";
    case Param::Alpha: return "alpha";
    case Param::Beta: return "beta";
  }
  return "?";
}

std::optional<Param> param_from_name(std::string_view name) noexcept {
  for (Param p : kAllParams) {
    if (param_name(p) == name) return p;
  }
  return std::nullopt;
}

std::vector<Param> ParamSet::members() const {
  std::vector<Param> out;
  for (Param p : kAllParams) {
    if (contains(p)) out.push_back(p);
  }
  return out;
}

std::string_view to_string(SolveRoute r) noexcept {
  switch (r) {
    case SolveRoute::DirectBoth: return "direct-both";
    case SolveRoute::Eq2ThenEq1: return "eq2-then-eq1";
    case SolveRoute::Eq1ThenEq2: return "eq1-then-eq2";
    case SolveRoute::SimultaneousClosedForm: return "simultaneous-closed-form";
    case SolveRoute::Invalid: return "invalid";
  }
  return "?";
}

std::string_view to_string(RoundingPolicy r) noexcept {
  switch (r) {
    case RoundingPolicy::Exact: return "exact";
    case RoundingPolicy::CeilInteger: return "ceil-integer";
    case RoundingPolicy::NearestInteger: return "nearest-integer";
  }
  return "?";
}

std::optional<RoundingPolicy> rounding_from_name(std::string_view name) noexcept {
  for (auto r : {RoundingPolicy::Exact, RoundingPolicy::CeilInteger, RoundingPolicy::NearestInteger}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

ChoicePattern ChoicePattern::from_unknowns(Param a, Param b) {
  if (a == b) fail(ErrorCode::Arity, "a pattern needs two distinct unknowns");
  ChoicePattern p;
  p.unknowns = ParamSet{a, b};
  p.inputs = p.unknowns.complement();
  p.route = classify(a, b);
  return p;
}

ChoicePattern ChoicePattern::from_inputs(ParamSet inputs) {
  if (inputs.size() != 4) {
    fail(ErrorCode::Arity,
         "exactly 4 of the 6 parameters must be chosen, got " + std::to_string(inputs.size()));
  }
  const auto u = inputs.complement().members();
  return from_unknowns(u[0], u[1]);
}

std::vector<ChoicePattern> enumerate_patterns() {
  std::vector<ChoicePattern> out;
  for (std::size_t i = 0; i < kAllParams.size(); ++i) {
    for (std::size_t j = i + 1; j < kAllParams.size(); ++j) {
      out.push_back(ChoicePattern::from_unknowns(kAllParams[i], kAllParams[j]));
    }
  }
  return out;
}

double AnalysisSpec::get(Param p) const noexcept {
  switch (p) {
    case Param::Theta0: return theta0;
    case Param::Theta1: return theta1;
    case Param::Deaths: return d;
    case Param::ThetaStar: return theta_star;
    case Param::Alpha: return alpha;
    case Param::Beta: return beta;
  }
  return 0.0;
}

void AnalysisSpec::set(Param p, double value) noexcept {
  switch (p) {
    case Param::Theta0: theta0 = value; break;
    case Param::Theta1: theta1 = value; break;
    case Param::Deaths: d = value; break;
    case Param::ThetaStar: theta_star = value; break;
    case Param::Alpha: alpha = value; break;
    case Param::Beta: beta = value; break;
  }
}

ChosenValues::ChosenValues(std::initializer_list<std::pair<Param, double>> init) {
  for (const auto& [p, v] : init) set(p, v);
}

ChosenValues& ChosenValues::set(Param p, double value) {
  if (has(p)) {
    fail(ErrorCode::Arity, "parameter " + std::string(param_name(p)) + " given twice");
  }
  values_[index(p)] = value;
  return *this;
}

std::optional<double> ChosenValues::get(Param p) const noexcept { return values_[index(p)]; }

ParamSet ChosenValues::which() const noexcept {
  ParamSet s;
  for (Param p : kAllParams) {
    if (has(p)) s.insert(p);
  }
  return s;
}

double information_root(double d, double pi) {
  require_positive(d, "d");
  require_allocation(pi);
  return std::sqrt(pi * (1.0 - pi) * d);
}

double log_hr_std_error(double d, double pi) { return 1.0 / information_root(d, pi); }

double alpha_from(double theta_star, double theta0, double d, double pi) {
  require_positive(theta_star, "theta_star");
  require_positive(theta0, "theta0");
  return normal_cdf(std::log(theta_star / theta0) * information_root(d, pi));
}

double power_from(double theta_star, double theta1, double d, double pi) {
  require_positive(theta_star, "theta_star");
  require_positive(theta1, "theta1");
  return normal_cdf(std::log(theta_star / theta1) * information_root(d, pi));
}

double threshold_from_alpha(double alpha, double theta0, double d, double pi) {
  require_probability(alpha, "alpha");
  require_positive(theta0, "theta0");
  return theta0 * std::exp(normal_quantile(alpha) / information_root(d, pi));
}

double threshold_from_beta(double beta, double theta1, double d, double pi) {
  require_probability(beta, "beta");
  require_positive(theta1, "theta1");
  return theta1 * std::exp(normal_quantile(1.0 - beta) / information_root(d, pi));
}

double deaths_from(double alpha, double beta, double theta0, double theta1, double pi) {
  require_probability(alpha, "alpha");
  require_probability(beta, "beta");
  require_positive(theta0, "theta0");
  require_positive(theta1, "theta1");
  require_allocation(pi);
  if (!(theta0 > theta1)) {
    fail(ErrorCode::Infeasible,
         "theta0 must exceed theta1 for a finite number of deaths to separate the hypotheses");
  }
  const double z = normal_quantile(1.0 - alpha) + normal_quantile(1.0 - beta);
  if (!(z > 0.0)) {
    fail(ErrorCode::Infeasible,
         "alpha + beta too large: Phi^-1(1-alpha) + Phi^-1(1-beta) must be positive");
  }
  const double root = z / std::log(theta0 / theta1);
  return root * root / (pi * (1.0 - pi));
}

ChoicePattern pattern_with_deaths_fixed(const ChoicePattern& pattern) {
  return pattern_after_rounding(pattern);
}

AnalysisSpec complete(AnalysisSpec spec, const ChoicePattern& pattern) {
  if (!pattern.solvable()) fail(ErrorCode::InvalidPattern, "cannot complete an invalid pattern");
  solve_in_place(spec, pattern);
  return spec;
}

Solution solve(const ChosenValues& inputs, double pi, RoundingPolicy rounding) {
  const ChoicePattern pattern = ChoicePattern::from_inputs(inputs.which());
  if (!pattern.solvable()) {
    const auto u = pattern.unknowns.members();
    fail(ErrorCode::InvalidPattern,
         "unknowns {" + std::string(param_name(u[0])) + ", " + std::string(param_name(u[1])) +
             "} are underdetermined: both sit in one equation while the other is overdetermined");
  }
  require_allocation(pi);
  for (Param p : pattern.inputs.members()) check_input_domain(p, *inputs.get(p));

  const bool both_hr_given =
      pattern.inputs.contains(Param::Theta0) && pattern.inputs.contains(Param::Theta1);
  if (both_hr_given && !(*inputs.get(Param::Theta0) > *inputs.get(Param::Theta1))) {
    const auto code = pattern.unknowns.contains(Param::Deaths) ? ErrorCode::Infeasible
                                                               : ErrorCode::DomainError;
    fail(code, "theta0 must be strictly greater than theta1 (H0 must be worse than H1)");
  }

  Solution sol;
  sol.pattern = pattern;
  sol.final_pattern = pattern;
  sol.rounding = rounding;
  sol.spec.pi = pi;
  for (Param p : pattern.inputs.members()) sol.spec.set(p, *inputs.get(p));
  solve_in_place(sol.spec, pattern);

  if (pattern.unknowns.contains(Param::Deaths)) {
    sol.d_exact = sol.spec.d;
    if (rounding != RoundingPolicy::Exact) {
      double rounded = rounding == RoundingPolicy::CeilInteger ? std::ceil(sol.spec.d)
                                                               : std::nearbyint(sol.spec.d);
      if (rounded < 1.0) rounded = 1.0;
      const ChoicePattern adjusted = pattern_after_rounding(pattern);
      AnalysisSpec s = sol.spec;
      s.d = rounded;
      solve_in_place(s, adjusted);
      sol.spec = s;
      sol.final_pattern = adjusted;
      sol.warnings.push_back("d rounded (" + std::string(to_string(rounding)) + ") from " +
                             num(*sol.d_exact) + " to " + num(rounded) + "; " +
                             std::string(param_name(adjusted.unknowns.members()[0])) + " and " +
                             std::string(param_name(adjusted.unknowns.members()[1])) +
                             " recomputed");
    }
  }

  for (Param p : pattern.unknowns.members()) {
    const double v = sol.spec.get(p);
    if (!std::isfinite(v) || v <= 0.0) {
      fail(ErrorCode::Infeasible, "solution for " + std::string(param_name(p)) + " is not a positive finite value");
    }
    if (auto w = output_domain_warning(p, v)) sol.warnings.push_back(*w);
  }
  if (!both_hr_given && !(sol.spec.theta0 > sol.spec.theta1)) {
    sol.warnings.push_back("solved theta0 <= theta1: H0 is not worse than H1");
  }
  if (sol.spec.theta1 > 1.0) {
    sol.warnings.push_back("theta1 > 1: the alternative hypothesis itself implies OS detriment");
  }
  return sol;
}

}  // namespace choose4
