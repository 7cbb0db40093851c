#include "qpredict/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qpredict/error.hpp"

namespace qpredict {

const char* to_string(PredictionResult::Method method) noexcept {
  switch (method) {
    case PredictionResult::Method::quadrature: return "quadrature";
    case PredictionResult::Method::analytic: return "analytic";
    case PredictionResult::Method::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

Density1 marginal_total(const Density2& rho) {
  const GridSpec& g1 = rho.grid1;
  const GridSpec& g2 = rho.grid2;
  const GridSpec out = sum_grid(g1, g2);
  std::vector<double> val(out.size(), 0.0);
  const std::size_t n1 = g1.size();
  const std::size_t n2 = g2.size();

  if (aligned(g1, g2)) {
    // p1_i + p2_j is exactly sum node i + j: walk each anti-diagonal.
    for (std::size_t k = 0; k < out.size(); ++k) {
      const std::size_t i_lo = k >= n2 ? k - (n2 - 1) : 0;
      const std::size_t i_hi = std::min(k, n1 - 1);
      double acc = 0.0;
      for (std::size_t i = i_lo; i <= i_hi; ++i) acc += g1.weight(i) * rho.at(i, k - i);
      val[k] = acc;
    }
  } else {
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double s = out.node(k);
      double acc = 0.0;
      for (std::size_t i = 0; i < n1; ++i) acc += g1.weight(i) * interpolate(g2, rho.row(i), s - g1.node(i));
      val[k] = acc;
    }
  }
  return Density1(out, std::move(val));
}

double window_probability(const Density1& marginal, const MeasurementWindow& window) {
  const GridSpec& g = marginal.grid;
  const double tol = 1e-9 * g.spacing();
  if (!(window.half_width > 0.0) || window.lower() < g.min() - tol || window.upper() > g.max() + tol) {
    std::ostringstream os;
    os << "window (" << window.lower() << ", " << window.upper() << ") is not inside the total-momentum range ["
       << g.min() << ", " << g.max() << "]";
    throw Error(ErrorKind::window_out_of_range, os.str());
  }
  return integrate_linear(g, marginal.val, window.lower(), window.upper());
}

ConditionalDensity conditional_density(const Density2& rho, double p) {
  return conditional_density(rho, marginal_total(rho), p);
}

ConditionalDensity conditional_density(const Density2& rho, const Density1& marginal, double p) {
  const GridSpec& g1 = rho.grid1;
  const GridSpec& g2 = rho.grid2;
  if (!marginal.grid.contains(p, 1e-9 * marginal.grid.spacing())) {
    std::ostringstream os;
    os << "conditioning value p = " << p << " lies outside the total-momentum range [" << marginal.grid.min()
       << ", " << marginal.grid.max() << "]";
    throw Error(ErrorKind::out_of_range, os.str());
  }
  std::vector<double> slice(g1.size());
  for (std::size_t i = 0; i < g1.size(); ++i) slice[i] = interpolate(g2, rho.row(i), p - g1.node(i));
  const double mass = trapezoid(g1, slice);
  const double peak = *std::max_element(marginal.val.begin(), marginal.val.end());
  if (!(mass > 0.0) || mass < kNegligibleEventFloor * peak) {
    std::ostringstream os;
    os << "total-momentum density at p = " << p << " is " << mass << ", below the conditioning floor "
       << kNegligibleEventFloor << " x " << peak;
    throw Error(ErrorKind::negligible_event, os.str());
  }
  for (double& v : slice) v /= mass;
  return ConditionalDensity{p, g1, std::move(slice)};
}

PredictionResult conditional_expectation(const Density2& rho, const Observable1& g, double p) {
  return conditional_expectation(rho, marginal_total(rho), g, p);
}

PredictionResult conditional_expectation(const Density2& rho, const Density1& marginal, const Observable1& g,
                                         double p) {
  const ConditionalDensity cd = conditional_density(rho, marginal, p);
  double acc = 0.0;
  for (std::size_t i = 0; i < cd.val.size(); ++i) acc += cd.grid.weight(i) * g(cd.grid.node(i)) * cd.val[i];
  return PredictionResult{acc, p, PredictionResult::Method::quadrature, std::nullopt};
}

double summable_split(double p, double a) {
  auto exact = [p](double x) { return x + (p - x) == p; };
  if (!std::isfinite(p) || !std::isfinite(a) || exact(a)) return a;
  // On multiples of p's own spacing the difference p - x is exact whenever it stays in p's range.
  if (p != 0.0) {
    const double q = std::nextafter(std::abs(p), INFINITY) - std::abs(p);
    const double snapped = std::round(a / q) * q;
    if (exact(snapped)) return snapped;
  }
  double lo = a;
  double hi = a;
  for (int k = 0; k < 64; ++k) {
    lo = std::nextafter(lo, -INFINITY);
    if (exact(lo)) return lo;
    hi = std::nextafter(hi, INFINITY);
    if (exact(hi)) return hi;
  }
  return a;
}

PredictionResult predict_p1(const Density2& rho, double p) { return predict_p1(rho, marginal_total(rho), p); }

PredictionResult predict_p1(const Density2& rho, const Density1& marginal, double p) {
  PredictionResult r = conditional_expectation(rho, marginal, Observable1::identity(), p);
  r.value = summable_split(p, r.value);
  return r;
}

PredictionResult predict_p2(const Density2& rho, double p) { return predict_p2(rho, marginal_total(rho), p); }

PredictionResult predict_p2(const Density2& rho, const Density1& marginal, double p) {
  PredictionResult r = predict_p1(rho, marginal, p);
  r.value = p - r.value;
  return r;
}

TowerCheck tower_check(const Density2& rho, const Observable1& g, const Observable1& h) {
  const GridSpec& g1 = rho.grid1;
  const GridSpec& g2 = rho.grid2;
  double lhs = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double p1 = g1.node(i);
    const double gp = g(p1);
    double row = 0.0;
    for (std::size_t j = 0; j < g2.size(); ++j) row += g2.weight(j) * h(p1 + g2.node(j)) * rho.at(i, j);
    lhs += g1.weight(i) * gp * row;
  }

  const Density1 marginal = marginal_total(rho);
  const double peak = *std::max_element(marginal.val.begin(), marginal.val.end());
  double rhs = 0.0;
  for (std::size_t k = 0; k < marginal.grid.size(); ++k) {
    const double m = marginal.val[k];
    if (m < kNegligibleEventFloor * peak || m <= 0.0) continue;
    const double p = marginal.grid.node(k);
    const double cond = conditional_expectation(rho, marginal, g, p).value;
    rhs += marginal.grid.weight(k) * h(p) * cond * m;
  }
  return TowerCheck{lhs, rhs};
}

}  // namespace qpredict
