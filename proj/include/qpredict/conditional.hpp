#pragma once

// Total-momentum marginal, window probabilities and conditional quantities of
// p1 given a measured total momentum p = p1 + p2.

#include <optional>
#include <vector>

#include "qpredict/state.hpp"

namespace qpredict {

/// Total-momentum window (center - half_width, center + half_width).
struct MeasurementWindow {
  double center = 0.0;
  double half_width = 0.0;

  double lower() const noexcept { return center - half_width; }
  double upper() const noexcept { return center + half_width; }
};

struct ConditionalDensity {
  double conditioning_p;
  GridSpec grid;  // over p1
  std::vector<double> val;
};

struct PredictionResult {
  enum class Method { quadrature, analytic, monte_carlo };

  double value;
  double conditioning_p;
  Method method;
  std::optional<double> std_error;  // present iff method == monte_carlo
};

const char* to_string(PredictionResult::Method method) noexcept;

/// Conditioning is refused below this fraction of the marginal's maximum.
inline constexpr double kNegligibleEventFloor = 1e-12;

/// rho_total(p) = integral of rho(p1, p - p1) dp1 on the sum grid (n1 + n2 - 1 nodes).
/// Off-node values of the second argument are linearly interpolated; the result
/// is not renormalized.
Density1 marginal_total(const Density2& rho);

/// Integral of the marginal over the window by the trapezoid rule with exact
/// endpoint interpolation. Throws Error(window_out_of_range) unless the window
/// lies inside the grid range.
double window_probability(const Density1& marginal, const MeasurementWindow& window);

/// rho(p1, p - p1) / rho_total(p) sampled on the p1 grid.
/// Throws Error(out_of_range) for p outside the sum range and
/// Error(negligible_event) when rho_total(p) is below the floor.
ConditionalDensity conditional_density(const Density2& rho, double p);
/// As above, reusing a precomputed marginal_total(rho).
ConditionalDensity conditional_density(const Density2& rho, const Density1& marginal, double p);

PredictionResult conditional_expectation(const Density2& rho, const Observable1& g, double p);
PredictionResult conditional_expectation(const Density2& rho, const Density1& marginal, const Observable1& g,
                                         double p);

/// A value within a few ulps of `a` for which x + (p - x) == p holds exactly in
/// double arithmetic, or `a` itself when no such value is nearby (this happens
/// only when |p| is many binades below |a|).
double summable_split(double p, double a);

/// E[p1 | p], adjusted by summable_split so that it and predict_p2 add up to p bitwise.
PredictionResult predict_p1(const Density2& rho, double p);
PredictionResult predict_p1(const Density2& rho, const Density1& marginal, double p);

/// E[p - p1 | p], computed as p - predict_p1(rho, p).value.
PredictionResult predict_p2(const Density2& rho, double p);
PredictionResult predict_p2(const Density2& rho, const Density1& marginal, double p);

struct TowerCheck {
  double lhs;  // direct two-dimensional quadrature of g(p1) h(p1 + p2)
  double rhs;  // integral of h(p) E[g | p] rho_total(p) over the sum grid
};

TowerCheck tower_check(const Density2& rho, const Observable1& g, const Observable1& h);

}  // namespace qpredict
