#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace choose4 {

// Dense row-major square matrix; only what the orthant kernel needs.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }

  static Matrix identity(std::size_t n);

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

// Lower-triangular L with L L^T = m. Throws Error(CholeskyFailure) when m is
// not symmetric positive definite.
Matrix cholesky(const Matrix& m);

enum class IntegrationMethod { Qmc, MonteCarlo };

std::string_view to_string(IntegrationMethod m) noexcept;

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct IntegrationSettings {
  std::uint64_t samples = std::uint64_t{1} << 20;
  std::uint64_t seed = kDefaultSeed;
  IntegrationMethod method = IntegrationMethod::Qmc;
  // Independent randomisations; the standard error comes from their spread.
  unsigned batches = 16;
  // 0 = hardware concurrency. The estimate never depends on this.
  unsigned threads = 0;
  // When set, batches not started before the budget expires are skipped
  // (at least two always run) and the result is marked truncated.
  std::optional<std::chrono::milliseconds> time_budget;
};

void validate(const IntegrationSettings& settings);

struct OrthantResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;  // 0 when evaluated in closed form
  std::uint64_t seed = 0;
  unsigned batches_used = 0;
  bool truncated = false;
};

// P(X_1 < upper_1, ..., X_K < upper_K) for X ~ N(mean, corr). `corr` must
// have a unit diagonal. K = 1 is evaluated exactly.
OrthantResult mvn_lower_orthant(std::span<const double> mean, const Matrix& corr,
                                std::span<const double> upper, const IntegrationSettings& settings);

// Seed for independent stream `index` derived from `seed` (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace choose4
