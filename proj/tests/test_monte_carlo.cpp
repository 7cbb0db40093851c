#include <cmath>
#include <cstdlib>
#include <numbers>

#include "doctest.h"
#include "qpredict/conditional.hpp"
#include "qpredict/error.hpp"
#include "qpredict/gaussian_analytic.hpp"
#include "qpredict/monte_carlo.hpp"
#include "qpredict/parallel.hpp"
#include "qpredict/philox.hpp"

using namespace qpredict;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::io_error;
}

bool same_points(const SampleSet& a, const SampleSet& b) {
  return a.seed == b.seed && a.source_hash == b.source_hash && a.points == b.points;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("open_unit stays inside (0, 1)") {
  CHECK(open_unit(0, 0) > 0.0);
  CHECK(open_unit(0xffffffff, 0xffffffff) < 1.0);
  CHECK(open_unit(0x80000000, 0) == doctest::Approx(0.5));
}

TEST_CASE("parallel_for_chunks covers every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for_chunks(1000, 64, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) ++hits[k];
  });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("sampling is deterministic across runs and thread counts") {
  const GaussianParams gp{0.0, 1.0, 1.0, 0.4};
  const std::size_t n = 3 * kSampleChunk + 17;
  setenv("QPREDICT_THREADS", "1", 1);
  const SampleSet a = sample(gp, n, 99);
  setenv("QPREDICT_THREADS", "4", 1);
  const SampleSet b = sample(gp, n, 99);
  CHECK(same_points(a, b));
  CHECK_FALSE(same_points(a, sample(gp, n, 100)));
  // Prefix property: sample i does not depend on n.
  const SampleSet c = sample(gp, 1000, 99);
  CHECK(std::equal(c.points.begin(), c.points.end(), a.points.begin()));

  const GridSpec g = make_grid(-7.0, 8.0, 128);
  const Density2 rho = density_of(gaussian_wavefunction(gp, g, g));
  setenv("QPREDICT_THREADS", "1", 1);
  const SampleSet d = sample(rho, n, 5);
  setenv("QPREDICT_THREADS", "3", 1);
  CHECK(same_points(d, sample(rho, n, 5)));
  unsetenv("QPREDICT_THREADS");
  CHECK(d.source_hash != a.source_hash);
}

TEST_CASE("exact Gaussian sampler reproduces the moments") {
  const GaussianParams gp{2.0, 4.0, 1.0, 0.3};
  const std::size_t n = 400000;
  const SampleSet s = sample(gp, n, 7);
  double m1 = 0.0, m2 = 0.0;
  for (const auto& p : s.points) {
    m1 += p[0];
    m2 += p[1];
  }
  m1 /= n;
  m2 /= n;
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(m1 - 2.0) < 4.0 * se);
  CHECK(std::abs(m2 - 4.0) < 4.0 * se);
  const EmpiricalTotalDensity h = empirical_total_density(s, 100);
  CHECK(std::abs(h.variance - 2.6) < 4.0 * h.variance_std_error);
  CHECK(h.mass() == doctest::Approx(1.0).epsilon(1e-12));
  // Histogram against the exact density: bias from the bin width plus 5 standard errors.
  const double var = 2.6;
  double worst = -INFINITY;
  for (std::size_t b = 0; b < h.density.size(); ++b) {
    const double x = h.bin_center(b);
    const double pdf = std::exp(-0.5 * (x - 6.0) * (x - 6.0) / var) / std::sqrt(2.0 * std::numbers::pi * var);
    const double bias = h.bin_width * h.bin_width / 24.0 / (var * std::sqrt(2.0 * std::numbers::pi * var));
    const double se_bin = std::sqrt(pdf / (static_cast<double>(n) * h.bin_width));
    worst = std::max(worst, std::abs(h.density[b] - pdf) - bias - 5.0 * se_bin);
  }
  CHECK(worst <= 0.0);
}

TEST_CASE("post-selected samples agree with the conditional expectation") {
  const GaussianParams gp{2.0, 4.0, 1.0, 0.3};
  const SampleSet s = sample(gp, 1000000, 3);
  const MeasurementWindow w{7.0, 0.05};
  const EmpiricalEstimate e = empirical_conditional(s, w, Observable1::identity());
  CHECK(e.n_accepted > 1000);
  CHECK(std::abs(e.mean - linear_predictor_p1(gp, 7.0)) < 4.0 * e.std_error);
  CHECK(kind_of([&] { empirical_conditional(s, {20.0, 0.01}, Observable1::identity()); }) ==
        ErrorKind::too_few_accepted);
}

TEST_CASE("grid sampler follows the interpolated density") {
  const GaussianParams gp{0.0, 0.0, 1.0, -0.5};
  const GridSpec g = make_grid(-8.0, 8.0, 256);
  const Density2 rho = density_of(gaussian_wavefunction(gp, g, g));
  const SampleSet s = sample(rho, 300000, 11);
  const MeasurementWindow w{0.8, 0.1};
  const EmpiricalEstimate e = empirical_conditional(s, w, Observable1::identity());
  const double quad = predict_p1(rho, 0.8).value;
  CHECK(std::abs(e.mean - quad) < 4.0 * e.std_error);
  const EmpiricalTotalDensity h = empirical_total_density(s, 50);
  CHECK(std::abs(h.variance - 1.0) < 4.0 * h.variance_std_error);
}

TEST_CASE("sampler argument checks") {
  CHECK(kind_of([] { sample(GaussianParams{0, 0, 1, 0}, 0, 1); }) == ErrorKind::invalid_argument);
  const SampleSet one = sample(GaussianParams{0, 0, 1, 0}, 1, 1);
  CHECK(one.n() == 1);
  CHECK(kind_of([&] { empirical_total_density(one, 10); }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] { empirical_total_density(sample(GaussianParams{0, 0, 1, 0}, 50, 1), 5); }) ==
        ErrorKind::invalid_argument);
}
