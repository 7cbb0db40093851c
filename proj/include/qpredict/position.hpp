#pragma once

// Coordinate representation of grid states and the uncertainty products that
// follow from it (hbar = 1).

#include <span>
#include <vector>

#include "qpredict/state.hpp"

namespace qpredict {

/// Psi(x1, x2) on the spectral duals of the momentum grids:
/// dx = 2 pi / (n dp), x_m = (m - n/2) dx.
struct PositionState {
  GridSpec xgrid1;
  GridSpec xgrid2;
  GridSpec pgrid1;  // momentum grids the state was transformed from
  GridSpec pgrid2;
  std::vector<Complex> amp;  // row-major, x1 index outermost

  const Complex& at(std::size_t m, std::size_t l) const { return amp[m * xgrid2.size() + l]; }
  /// Sum of |Psi|^2 dx1 dx2 over the periodic cell.
  double norm_squared() const;
};

/// Psi(x1, x2) = (2 pi)^-1 * integral of exp(i (p1 x1 + p2 x2)) Psi(p1, p2) dp1 dp2,
/// evaluated exactly on the dual grid with one two-dimensional FFT.
/// Throws Error(odd_grid) for odd point counts.
PositionState to_position(const WaveFunction2& psi);

struct MomentPair {
  double mean;
  double second;  // E[p1^2]
};

/// <p1> and <p1^2> computed in position space from the spectral derivative
/// -i d/dx1 Psi, using the momentum band the state was transformed from.
MomentPair spectral_p1_moments(const PositionState& pos);

struct UncertaintyReport {
  double sd_p1;
  double sd_x1;
  double sd_p2;
  double sd_x2;
  double sd_ptotal;
  double sd_xcm;
  double m1;
  double m2;

  double product_1() const noexcept { return sd_x1 * sd_p1; }
  double product_2() const noexcept { return sd_x2 * sd_p2; }
  double product_cm() const noexcept { return sd_xcm * sd_ptotal; }
};

/// Minimum-uncertainty bound for every conjugate pair used here (hbar / 2).
inline constexpr double kUncertaintyBound = 0.5;

/// Momentum spreads from the momentum density, position spreads from the
/// position density; x_cm = (m1 x1 + m2 x2) / (m1 + m2).
UncertaintyReport uncertainty_report(const WaveFunction2& psi, double m1 = 1.0, double m2 = 1.0);

struct CmLadderRow {
  double eps;            // requested half-width
  double eps_effective;  // snapped half-width actually applied
  double norm_prob;
  double sd_ptotal;
  double sd_xcm;
};

struct CmLadder {
  std::vector<CmLadderRow> rows;

  bool sd_xcm_strictly_increasing() const;
  bool sd_ptotal_strictly_decreasing() const;
  double min_product() const;
};

/// Measures the total momentum with each window (p, eps) and reports the
/// spreads of p and x_cm in the post-measurement state. eps_list must be
/// strictly decreasing and every entry must span four sum-grid cells.
CmLadder cm_variance_vs_epsilon(const WaveFunction2& psi, double p, std::span<const double> eps_list,
                                double m1 = 1.0, double m2 = 1.0);

}  // namespace qpredict
