#pragma once

#include <cstddef>
#include <span>

namespace qpredict {

/// Uniform one-dimensional grid of `size()` nodes spanning [min, max].
///
/// Construct through make_grid(), which enforces max > min, n >= 16 and n even.
class GridSpec {
 public:
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return (max_ - min_) / static_cast<double>(n_ - 1); }
  double node(std::size_t i) const noexcept {
    return min_ + static_cast<double>(i) * spacing();
  }
  /// Composite trapezoid weight of node i (includes the spacing).
  double weight(std::size_t i) const noexcept {
    return (i == 0 || i + 1 == n_) ? 0.5 * spacing() : spacing();
  }
  bool contains(double x, double tol = 0.0) const noexcept {
    return x >= min_ - tol && x <= max_ + tol;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  friend GridSpec make_grid(double p_min, double p_max, std::size_t n);
  friend GridSpec sum_grid(const GridSpec& g1, const GridSpec& g2);
  GridSpec(double lo, double hi, std::size_t n) : min_(lo), max_(hi), n_(n) {}

  double min_;
  double max_;
  std::size_t n_;
};

/// Throws Error(invalid_range) unless p_max > p_min (both finite), and
/// Error(invalid_count) unless n >= 16 and n is even.
GridSpec make_grid(double p_min, double p_max, std::size_t n);

/// Grid carrying the values of p1 + p2: n1 + n2 - 1 nodes over the exact sum range.
GridSpec sum_grid(const GridSpec& g1, const GridSpec& g2);

/// True when both grids share one spacing, so every p1_i + p2_j is a sum-grid node i + j.
bool aligned(const GridSpec& g1, const GridSpec& g2) noexcept;

/// Composite trapezoid integral of nodal values.
double trapezoid(const GridSpec& g, std::span<const double> values);

/// Piecewise-linear interpolant of nodal values at x; zero outside [min, max].
/// Points within 1e-9 cells of a node return that node's value exactly.
double interpolate(const GridSpec& g, std::span<const double> values, double x);

/// Exact integral over [a, b] of the piecewise-linear interpolant of nodal values.
/// The interval is clipped to the grid range; returns 0 when a >= b.
double integrate_linear(const GridSpec& g, std::span<const double> values, double a, double b);

}  // namespace qpredict
