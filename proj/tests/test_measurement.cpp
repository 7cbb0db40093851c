#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "qpredict/conditional.hpp"
#include "qpredict/error.hpp"
#include "qpredict/measurement.hpp"
#include "qpredict/state.hpp"

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

const WaveFunction2& correlated_state() {
  static const WaveFunction2 psi = [] {
    const GridSpec g = make_grid(-8.0, 8.0, 1024);
    return gaussian_wavefunction({0.0, 0.0, 1.0, 0.5}, g, g);
  }();
  return psi;
}

const WaveFunction2& bimodal_state() {
  static const WaveFunction2 psi = [] {
    const GridSpec g = make_grid(-8.0, 8.0, 512);
    const MixtureComponent parts[] = {{0.5, {-1.5, -1.5, 1.0, 0.0}}, {0.5, {1.5, 1.5, 1.0, 0.0}}};
    return mixture_wavefunction(parts, g, g);
  }();
  return psi;
}

}  // namespace

TEST_CASE("windows snap to sum-grid nodes and whole cells") {
  const WaveFunction2& psi = correlated_state();
  const GridSpec s = sum_grid(psi.grid1, psi.grid2);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uc(-3.0, 3.0), ue(0.05, 1.0);
  for (int t = 0; t < 100; ++t) {
    const MeasurementWindow req{uc(rng), ue(rng)};
    const MeasurementWindow w = snap_window(psi.grid1, psi.grid2, req);
    const double kc = (w.center - s.min()) / s.spacing();
    const double cells = w.half_width / s.spacing();
    CHECK(std::abs(kc - std::round(kc)) < 1e-9);
    CHECK(std::abs(cells - std::round(cells)) < 1e-9);
    CHECK(std::abs(w.center - req.center) <= 0.5 * s.spacing() + 1e-12);
    CHECK(std::abs(w.half_width - req.half_width) <= 0.5 * s.spacing() + 1e-12);
  }
  CHECK(kind_of([&] { apply_window(psi, {0.0, 0.2 * s.spacing()}); }) == ErrorKind::window_resolution_exceeded);
  CHECK(kind_of([&] { apply_window(psi, {15.0, 0.5}); }) == ErrorKind::zero_probability_window);
  CHECK(kind_of([&] { apply_window(psi, {40.0, 0.5}); }) == ErrorKind::zero_probability_window);
}

TEST_CASE("projection is bitwise idempotent") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uc(-3.0, 3.0), ue(0.02, 1.5);
  for (const WaveFunction2* psi : {&correlated_state(), &bimodal_state()}) {
    for (int t = 0; t < 20; ++t) {
      const MeasurementWindow w{uc(rng), ue(rng)};
      CHECK(projection_idempotence_check(*psi, w));
      const WaveFunction2 once = project(*psi, w);
      const WaveFunction2 twice = project(once, w);
      CHECK(std::memcmp(once.amp.data(), twice.amp.data(), once.amp.size() * sizeof(Complex)) == 0);
    }
  }
}

TEST_CASE("outcome probability equals the window probability of the marginal") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uc(-2.5, 2.5), ue(0.05, 1.0);
  for (const WaveFunction2* psi : {&correlated_state(), &bimodal_state()}) {
    const Density1 m = marginal_total(density_of(*psi));
    for (int t = 0; t < 20; ++t) {
      const PostMeasurementState post = apply_window(*psi, {uc(rng), ue(rng)});
      CHECK(std::abs(post.norm_prob - window_probability(m, post.window)) <= 1e-6);
      CHECK(norm_squared(post.psi) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("narrower windows sharpen the total momentum") {
  const WaveFunction2& psi = correlated_state();
  const double cell = sum_grid(psi.grid1, psi.grid2).spacing();
  double previous = INFINITY;
  for (double eps = 1.0; eps >= 0.06; eps /= 2.0) {
    const PostMeasurementState post = apply_window(psi, {0.4, eps});
    const double m1 = post_expectation_total(post, Observable1::identity());
    const double m2 = post_expectation_total(post, Observable1::square());
    const double var = m2 - m1 * m1;
    const double e = post.window.half_width;
    CHECK(var <= e * e / 3.0 + 2.0 * e * cell);
    CHECK(var < previous);
    previous = var;
  }
}

TEST_CASE("log-log slope fit") {
  const std::vector<double> eps = {1.0, 0.5, 0.25, 0.125};
  std::vector<double> err;
  for (double e : eps) err.push_back(0.3 * e * e);
  CHECK(fit_log_log_slope(eps, err) == doctest::Approx(2.0).epsilon(1e-12));
  const std::vector<double> tiny = {1e-3, 1e-11, 1e-12, 0.0};
  CHECK(std::isnan(fit_log_log_slope(eps, tiny)));
}

TEST_CASE("epsilon study converges at second order to the conditional expectation") {
  const WaveFunction2& psi = correlated_state();
  const ConvergenceReport r = epsilon_limit_study(psi, 0.5, Observable1::identity(), 1.0, 3);
  CHECK(r.eps_values.size() == 4);
  CHECK_FALSE(r.degenerate);
  CHECK(r.fitted_order >= 1.7);
  CHECK(r.fitted_order <= 2.3);
  CHECK(r.abs_errors.back() < r.abs_errors.front());
  const Density2 rho = density_of(psi);
  CHECK(r.reference == conditional_expectation(rho, Observable1::identity(), r.center).value);
  for (std::size_t k = 1; k < r.eps_values.size(); ++k) CHECK(r.eps_values[k] < r.eps_values[k - 1]);
}

TEST_CASE("symmetric observables give a degenerate study") {
  // E[p1 | p] = p / 2 exactly and every window is symmetric about its center.
  const WaveFunction2& psi = correlated_state();
  const ConvergenceReport r = epsilon_limit_study(psi, 0.0, Observable1::identity(), 1.0, 3);
  CHECK(r.degenerate);
  CHECK(std::isnan(r.fitted_order));
}

TEST_CASE("total-momentum study converges to G(p)") {
  const WaveFunction2& psi = correlated_state();
  const ConvergenceReport r = total_limit_study(psi, 0.5, Observable1::square(), 1.0, 3);
  CHECK(r.reference == doctest::Approx(r.center * r.center).epsilon(1e-15));
  CHECK(r.abs_errors.back() <= 5e-4 * 16.0);
  CHECK(r.fitted_order >= 1.7);
  CHECK(r.fitted_order <= 2.3);
}

TEST_CASE("limit studies guard their ladders") {
  const WaveFunction2& psi = correlated_state();
  CHECK(kind_of([&] { epsilon_limit_study(psi, 0.5, Observable1::identity(), 1.0, 2); }) ==
        ErrorKind::invalid_argument);
  CHECK(kind_of([&] { epsilon_limit_study(psi, 0.5, Observable1::identity(), 1.0, 6); }) ==
        ErrorKind::window_resolution_exceeded);
  CHECK(kind_of([&] { require_window_resolution(psi.grid1, psi.grid2, 0.03); }) ==
        ErrorKind::window_resolution_exceeded);
  require_window_resolution(psi.grid1, psi.grid2, 0.07);
}
