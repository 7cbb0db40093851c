#include "qpredict/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpredict/error.hpp"

namespace qpredict {

GridSpec make_grid(double p_min, double p_max, std::size_t n) {
  if (!std::isfinite(p_min) || !std::isfinite(p_max) || !(p_max > p_min)) {
    throw Error(ErrorKind::invalid_range,
                "grid range [" + std::to_string(p_min) + ", " + std::to_string(p_max) +
                    "] is empty or not finite");
  }
  if (n < 16 || n % 2 != 0) {
    throw Error(ErrorKind::invalid_count,
                "grid point count " + std::to_string(n) + " must be even and >= 16");
  }
  return GridSpec(p_min, p_max, n);
}

GridSpec sum_grid(const GridSpec& g1, const GridSpec& g2) {
  return GridSpec(g1.min() + g2.min(), g1.max() + g2.max(), g1.size() + g2.size() - 1);
}

bool aligned(const GridSpec& g1, const GridSpec& g2) noexcept {
  const double d1 = g1.spacing();
  const double d2 = g2.spacing();
  return std::abs(d1 - d2) <= 1e-12 * std::max(d1, d2);
}

double trapezoid(const GridSpec& g, std::span<const double> values) {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += g.weight(i) * values[i];
  return acc;
}

namespace {

// Evaluation points within this many cells of a node are treated as the node.
constexpr double kEdgeTol = 1e-9;

}  // namespace

double interpolate(const GridSpec& g, std::span<const double> values, double x) {
  const double h = g.spacing();
  double t = (x - g.min()) / h;
  const double last = static_cast<double>(g.size() - 1);
  if (t < -kEdgeTol || t > last + kEdgeTol) return 0.0;
  t = std::clamp(t, 0.0, last);
  const double nearest = std::round(t);
  if (std::abs(t - nearest) <= kEdgeTol) return values[static_cast<std::size_t>(nearest)];
  auto i = static_cast<std::size_t>(t);
  if (i >= g.size() - 1) i = g.size() - 2;
  const double f = t - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

double integrate_linear(const GridSpec& g, std::span<const double> values, double a, double b) {
  a = std::max(a, g.min());
  b = std::min(b, g.max());
  if (!(a < b)) return 0.0;
  const double h = g.spacing();
  const std::size_t last = g.size() - 1;
  // Cells are [node(i), node(i+1)]; integrate the linear piece over the overlap.
  auto cell_of = [&](double x) {
    auto i = static_cast<std::size_t>(std::clamp((x - g.min()) / h, 0.0, static_cast<double>(last)));
    return std::min(i, last - 1);
  };
  const std::size_t ia = cell_of(a);
  const std::size_t ib = cell_of(b);
  double acc = 0.0;
  for (std::size_t i = ia; i <= ib; ++i) {
    const double x0 = g.node(i);
    const double lo = std::max(a, x0);
    const double hi = std::min(b, g.node(i + 1));
    if (!(lo < hi)) continue;
    const double f_lo = values[i] + (values[i + 1] - values[i]) * (lo - x0) / h;
    const double f_hi = values[i] + (values[i + 1] - values[i]) * (hi - x0) / h;
    acc += 0.5 * (f_lo + f_hi) * (hi - lo);
  }
  return acc;
}

}  // namespace qpredict
