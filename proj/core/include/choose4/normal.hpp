#pragma once

namespace choose4 {

// Standard normal CDF, accurate to ~1e-16 absolute on finite input.
double normal_cdf(double x) noexcept;

// Inverse of normal_cdf. Throws Error(DomainError) unless 0 < p < 1.
double normal_quantile(double p);

// Quantile without the domain check, for hot loops whose argument is known to
// lie in (0, 1). Returns +/-inf at the endpoints.
double normal_quantile_unchecked(double p) noexcept;

}  // namespace choose4
