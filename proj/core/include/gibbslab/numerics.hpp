#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace gibbslab {

using Rng = std::mt19937_64;

// Independent stream for (seed, stream id); the only way the library seeds.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

struct Estimate {
  double value = 0;
  double stderr_ = 0;
};

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased
Estimate mean_estimate(std::span<const double> x);
// Standard error from non-overlapping batch means (for correlated chains).
Estimate batch_mean_estimate(std::span<const double> x, std::size_t batches = 20);

// Kahan-compensated sum, so reductions do not depend on chunking.
double compensated_sum(std::span<const double> x);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  double slope_stderr = 0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int points);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
struct KsResult {
  double statistic = 0;
  double p_value = 0;
};
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Number of worker threads from GIBBSLAB_THREADS (default 1).
int configured_threads();
// Runs fn(i) for i in [0, count). Work items must be independent; results are
// written by index so the outcome never depends on the schedule.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace gibbslab
