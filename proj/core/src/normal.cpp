#include "choose4/normal.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "choose4/error.hpp"

namespace choose4 {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Domain errors are reported by our own checks; boost must never throw or
// touch errno from inside the integration loops.
using QuietPolicy = boost::math::policies::policy<
    boost::math::policies::domain_error<boost::math::policies::ignore_error>,
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>>;

}  // namespace

double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / kSqrt2);
}

double normal_quantile_unchecked(double p) noexcept {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  // erfc_inv works on (0, 2); using 2p keeps full relative precision in the
  // lower tail, and symmetry handles the upper tail.
  if (p < 0.5) return -kSqrt2 * boost::math::erfc_inv(2.0 * p, QuietPolicy());
  return kSqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p), QuietPolicy());
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorCode::DomainError,
         "normal_quantile: probability must lie in (0, 1), got " + std::to_string(p));
  }
  return normal_quantile_unchecked(p);
}

}  // namespace choose4
