#include "choose4/mvn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "choose4/error.hpp"
#include "choose4/normal.hpp"

namespace choose4 {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<double> kronecker_generators(std::size_t dims) {
  std::vector<double> out;
  for (unsigned candidate = 2; out.size() < dims; ++candidate) {
    bool prime = true;
    for (unsigned q = 2; q * q <= candidate; ++q) {
      if (candidate % q == 0) {
        prime = false;
        break;
      }
    }
    if (!prime) continue;
    const double r = std::sqrt(static_cast<double>(candidate));
    out.push_back(r - std::floor(r));
  }
  return out;
}

// Genz's separation-of-variables integrand for the lower orthant. `w` holds
// K-1 uniforms; `y` is scratch of the same length.
double sov_integrand(const Matrix& chol, std::span<const double> b, std::span<const double> w,
                     std::span<double> y) noexcept {
  const std::size_t k = b.size();
  double e = normal_cdf(b[0] / chol(0, 0));
  double f = e;
  for (std::size_t i = 1; i < k; ++i) {
    if (e <= 0.0) return 0.0;
    const double u = std::clamp(w[i - 1] * e, 1e-300, 1.0 - 1e-16);
    y[i - 1] = normal_quantile_unchecked(u);
    double s = 0.0;
    for (std::size_t j = 0; j < i; ++j) s += chol(i, j) * y[j];
    e = normal_cdf((b[i] - s) / chol(i, i));
    f *= e;
  }
  return f;
}

struct BatchJob {
  const Matrix* chol;
  std::span<const double> b;
  const std::vector<double>* generators;
  std::uint64_t points;
  std::uint64_t seed;
  IntegrationMethod method;
};

double run_batch(const BatchJob& job, std::uint64_t batch_index) {
  const std::size_t dims = job.b.size() - 1;
  std::mt19937_64 rng(derive_seed(job.seed, batch_index));
  std::vector<double> w(dims), y(dims), x(dims);
  for (std::size_t j = 0; j < dims; ++j) x[j] = to_unit(rng());  // random shift

  double sum = 0.0;
  for (std::uint64_t n = 0; n < job.points; ++n) {
    if (job.method == IntegrationMethod::Qmc) {
      for (std::size_t j = 0; j < dims; ++j) {
        x[j] += (*job.generators)[j];
        if (x[j] >= 1.0) x[j] -= 1.0;
        w[j] = 1.0 - std::fabs(2.0 * x[j] - 1.0);  // tent transform
      }
    } else {
      for (std::size_t j = 0; j < dims; ++j) w[j] = to_unit(rng());
    }
    sum += sov_integrand(*job.chol, job.b, w, y);
  }
  return sum / static_cast<double>(job.points);
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix cholesky(const Matrix& m) {
  const std::size_t n = m.size();
  Matrix l(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(m(i, j) - m(j, i)) > 1e-12) {
        fail(ErrorCode::CholeskyFailure, "correlation matrix is not symmetric");
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double diag = m(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 1e-14)) {
      fail(ErrorCode::CholeskyFailure,
           "correlation matrix is not positive definite (pivot " + std::to_string(j) + ")");
    }
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = m(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

std::string_view to_string(IntegrationMethod m) noexcept {
  return m == IntegrationMethod::Qmc ? "qmc" : "mc";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

void validate(const IntegrationSettings& s) {
  if (s.batches < 2) fail(ErrorCode::InvalidSettings, "integration needs at least 2 batches");
  if (s.samples < s.batches) {
    fail(ErrorCode::InvalidSettings, "sample count must be at least the number of batches");
  }
  if (s.time_budget && s.time_budget->count() < 0) {
    fail(ErrorCode::InvalidSettings, "time budget must be non-negative");
  }
}

OrthantResult mvn_lower_orthant(std::span<const double> mean, const Matrix& corr,
                                std::span<const double> upper, const IntegrationSettings& settings) {
  const std::size_t k = upper.size();
  if (k == 0 || mean.size() != k || corr.size() != k) {
    fail(ErrorCode::InvalidSettings, "mean, correlation and limits must share one dimension >= 1");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (std::fabs(corr(i, i) - 1.0) > 1e-12) {
      fail(ErrorCode::CholeskyFailure, "correlation matrix must have a unit diagonal");
    }
  }
  validate(settings);

  std::vector<double> b(k);
  for (std::size_t i = 0; i < k; ++i) b[i] = upper[i] - mean[i];

  OrthantResult out;
  out.seed = settings.seed;
  if (k == 1) {
    out.estimate = normal_cdf(b[0]);
    return out;
  }

  const Matrix chol = cholesky(corr);
  const auto generators = kronecker_generators(k - 1);
  const unsigned batches = settings.batches;
  const std::uint64_t points = settings.samples / batches;
  const BatchJob job{&chol, b, &generators, points, settings.seed, settings.method};

  std::vector<double> means(batches, 0.0);
  std::vector<char> done(batches, 0);
  const auto deadline = settings.time_budget
                            ? std::optional(std::chrono::steady_clock::now() + *settings.time_budget)
                            : std::nullopt;
  std::atomic<unsigned> next{0};
  auto worker = [&] {
    for (unsigned i = next.fetch_add(1); i < batches; i = next.fetch_add(1)) {
      if (deadline && i >= 2 && std::chrono::steady_clock::now() > *deadline) continue;
      means[i] = run_batch(job, i);
      done[i] = 1;
    }
  };

  unsigned threads = settings.threads ? settings.threads : std::thread::hardware_concurrency();
  threads = std::clamp(threads, 1u, batches);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Merge in batch order so the result is independent of scheduling.
  double sum = 0.0, sumsq = 0.0;
  unsigned used = 0;
  for (unsigned i = 0; i < batches; ++i) {
    if (!done[i]) continue;
    sum += means[i];
    sumsq += means[i] * means[i];
    ++used;
  }
  const double mu = sum / used;
  const double var = std::max(0.0, (sumsq - used * mu * mu) / (used - 1));
  out.estimate = mu;
  out.std_error = std::sqrt(var / used);
  out.n_samples = points * used;
  out.batches_used = used;
  out.truncated = used < batches;
  return out;
}

}  // namespace choose4
