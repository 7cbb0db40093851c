#pragma once

// Projection measurement of the total momentum: a sharp window on p1 + p2 is
// applied to the amplitudes, the state is renormalized, and expectations in the
// post-measurement state are compared with conditional expectations as the
// window shrinks.

#include <cstddef>
#include <span>
#include <vector>

#include "qpredict/conditional.hpp"
#include "qpredict/state.hpp"

namespace qpredict {

/// Windows are applied on the sum grid: the center is snapped to the nearest
/// sum-grid node and the half-width to a whole number of cells.
MeasurementWindow snap_window(const GridSpec& g1, const GridSpec& g2, const MeasurementWindow& requested);

/// Amplitudes with every node outside the snapped window set to zero; no renormalization.
WaveFunction2 project(const WaveFunction2& psi, const MeasurementWindow& window);

/// Mass of rho inside the band |p1 + p2 - center| <= half_width of a snapped
/// window. The density is interpolated linearly across the sum direction, so
/// the band edges may cut through a node's cell.
double band_probability(const Density2& rho, const MeasurementWindow& snapped);

struct PostMeasurementState {
  WaveFunction2 psi;           // projected and renormalized
  MeasurementWindow window;    // the snapped window actually applied
  double norm_prob;            // probability of the outcome, before renormalization
};

/// Throws Error(zero_probability_window) when the outcome probability is below 1e-12
/// and Error(window_resolution_exceeded) when the half-width rounds to zero cells.
PostMeasurementState apply_window(const WaveFunction2& psi, const MeasurementWindow& window);

/// True iff projecting twice gives bitwise the same amplitudes as projecting once.
bool projection_idempotence_check(const WaveFunction2& psi, const MeasurementWindow& window);

double post_expectation_p1(const PostMeasurementState& state, const Observable1& f);
double post_expectation_total(const PostMeasurementState& state, const Observable1& g);

struct ConvergenceReport {
  double center;                          // snapped conditioning value
  std::vector<double> eps_values;         // effective half-widths, strictly decreasing
  std::vector<double> observable_values;
  double reference;                       // conditional expectation at `center`
  std::vector<double> abs_errors;
  double fitted_order;                    // NaN when degenerate
  bool degenerate;                        // fewer than two errors above the floor
};

/// Errors at or below this value are excluded from the order fit.
inline constexpr double kConvergenceErrorFloor = 1e-10;

/// Least-squares slope of log(err) against log(eps) over points with err above
/// the floor. Returns NaN when fewer than two points qualify.
double fit_log_log_slope(std::span<const double> eps, std::span<const double> errors);

/// Post-measurement expectations of f(p1) for half-widths eps_start / 2^k,
/// k = 0..halvings, against the conditional expectation at the window center.
/// Requires halvings >= 3 and the smallest half-width to span at least four
/// sum-grid cells (Error(window_resolution_exceeded) otherwise).
ConvergenceReport epsilon_limit_study(const WaveFunction2& psi, double p, const Observable1& f, double eps_start,
                                      int halvings);

/// Same ladder for g(p1 + p2); the reference is g(center).
ConvergenceReport total_limit_study(const WaveFunction2& psi, double p, const Observable1& g, double eps_start,
                                    int halvings);

/// Minimum half-width, in sum-grid cells, accepted by the limit studies.
inline constexpr double kMinWindowCells = 4.0;

/// Throws Error(window_resolution_exceeded) when eps spans fewer than four sum-grid cells.
void require_window_resolution(const GridSpec& g1, const GridSpec& g2, double eps);

}  // namespace qpredict
