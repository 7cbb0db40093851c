#pragma once

// Independent sampling route: draw (p1, p2) pairs from a state's density,
// condition by post-selecting on a total-momentum window, and report
// empirical means with their standard errors.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "qpredict/conditional.hpp"
#include "qpredict/state.hpp"

namespace qpredict {

struct SampleSet {
  std::uint64_t seed;
  std::uint64_t source_hash;  // FNV-1a digest of the sampled state
  std::vector<std::array<double, 2>> points;

  std::size_t n() const noexcept { return points.size(); }
};

/// Samples per counter-based substream chunk. Sample i always uses counter
/// (i, stream); the chunk size only decides how work is split across threads.
inline constexpr std::size_t kSampleChunk = 1 << 16;

/// Exact bivariate construction p1 = mu1 + sigma z1,
/// p2 = mu2 + sigma (c z1 + sqrt(1 - c^2) z2) with Box-Muller normals.
SampleSet sample(const GaussianParams& params, std::size_t n, std::uint64_t seed);

/// Inverse-transform sampling of the bilinear interpolant of the grid density:
/// p1 from its marginal, then p2 from the interpolated conditional slice.
SampleSet sample(const Density2& rho, std::size_t n, std::uint64_t seed);

struct EmpiricalEstimate {
  double mean;
  double std_error;  // sample standard deviation / sqrt(n_accepted)
  std::size_t n_accepted;
  MeasurementWindow window;
};

/// Below this many accepted samples the normal-theory standard error is not reported.
inline constexpr std::size_t kMinAccepted = 100;

/// Mean of g(p1) over samples with p1 + p2 in the open window.
/// Throws Error(too_few_accepted) when fewer than kMinAccepted samples qualify.
EmpiricalEstimate empirical_conditional(const SampleSet& samples, const MeasurementWindow& window,
                                        const Observable1& g);

/// Unit-mass histogram of p1 + p2 together with its sample moments.
struct EmpiricalTotalDensity {
  double lo;
  double bin_width;
  std::vector<double> density;  // per bin, count / (n * bin_width)
  std::size_t n;
  double mean;
  double variance;              // unbiased sample variance of p1 + p2
  double variance_std_error;    // sqrt((m4 - variance^2) / n)

  double bin_center(std::size_t b) const noexcept { return lo + (static_cast<double>(b) + 0.5) * bin_width; }
  double mass() const noexcept;
};

/// Requires bins >= 10 and at least two samples.
EmpiricalTotalDensity empirical_total_density(const SampleSet& samples, std::size_t bins);

}  // namespace qpredict
