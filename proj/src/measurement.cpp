#include "qpredict/measurement.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "qpredict/error.hpp"

namespace qpredict {

namespace {

constexpr double kMinOutcomeProbability = 1e-12;

struct SnappedIndex {
  long center;  // sum-grid node index (may lie outside [0, n_sum) when the window is partly off-grid)
  long half;    // half-width in cells
};

SnappedIndex snapped_index(const GridSpec& g1, const GridSpec& g2, const MeasurementWindow& w) {
  const GridSpec s = sum_grid(g1, g2);
  const double h = s.spacing();
  return SnappedIndex{std::lround((w.center - s.min()) / h), std::lround(w.half_width / h)};
}

// Position of node (i, j) on the sum grid, in cells from the first sum node.
template <class Fn>
void for_each_node(const GridSpec& g1, const GridSpec& g2, Fn&& fn) {
  const GridSpec s = sum_grid(g1, g2);
  if (aligned(g1, g2)) {
    for (std::size_t i = 0; i < g1.size(); ++i)
      for (std::size_t j = 0; j < g2.size(); ++j) fn(i, j, static_cast<double>(i + j));
  } else {
    const double h = s.spacing();
    for (std::size_t i = 0; i < g1.size(); ++i)
      for (std::size_t j = 0; j < g2.size(); ++j) fn(i, j, (g1.node(i) + g2.node(j) - s.min()) / h);
  }
}

// Integral of the unit hat function max(0, 1 - |v|) over (-inf, u].
double hat_primitive(double u) {
  if (u <= -1.0) return 0.0;
  if (u <= 0.0) return 0.5 * (1.0 + u) * (1.0 + u);
  if (u <= 1.0) return 1.0 - 0.5 * (1.0 - u) * (1.0 - u);
  return 1.0;
}

PostMeasurementState apply_snapped(const WaveFunction2& psi, const Density2& rho, const MeasurementWindow& snapped) {
  const double prob = band_probability(rho, snapped);
  if (!(prob >= kMinOutcomeProbability)) {
    std::ostringstream os;
    os << "window (" << snapped.lower() << ", " << snapped.upper() << ") has outcome probability " << prob;
    throw Error(ErrorKind::zero_probability_window, os.str());
  }
  WaveFunction2 projected = project(psi, snapped);
  if (!(norm_squared(projected) > 0.0)) {
    throw Error(ErrorKind::zero_probability_window, "window contains no grid node with nonzero amplitude");
  }
  return PostMeasurementState{normalize(std::move(projected)), snapped, prob};
}

template <class Fn>
double windowed_mean(const WaveFunction2& psi, Fn&& f) {
  const GridSpec& g1 = psi.grid1;
  const GridSpec& g2 = psi.grid2;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double p1 = g1.node(i);
    double row_num = 0.0;
    double row_den = 0.0;
    for (std::size_t j = 0; j < g2.size(); ++j) {
      const double d = std::norm(psi.at(i, j));
      if (d == 0.0) continue;
      const double w = g2.weight(j) * d;
      row_num += w * f(p1, g2.node(j));
      row_den += w;
    }
    num += g1.weight(i) * row_num;
    den += g1.weight(i) * row_den;
  }
  return num / den;
}

template <class Evaluate>
ConvergenceReport run_ladder(const WaveFunction2& psi, double p, double eps_start, int halvings,
                             Evaluate&& evaluate) {
  if (halvings < 3) {
    throw Error(ErrorKind::invalid_argument, "the epsilon ladder needs at least 3 halvings");
  }
  if (!(eps_start > 0.0)) throw Error(ErrorKind::invalid_argument, "eps_start must be positive");
  require_window_resolution(psi.grid1, psi.grid2, std::ldexp(eps_start, -halvings));

  const Density2 rho = density_of(psi);
  ConvergenceReport report{};
  report.center = snap_window(psi.grid1, psi.grid2, {p, eps_start}).center;
  for (int k = 0; k <= halvings; ++k) {
    const MeasurementWindow snapped = snap_window(psi.grid1, psi.grid2, {p, std::ldexp(eps_start, -k)});
    const PostMeasurementState state = apply_snapped(psi, rho, snapped);
    report.eps_values.push_back(snapped.half_width);
    report.observable_values.push_back(evaluate(state));
  }
  return report;
}

void finish_report(ConvergenceReport& report) {
  for (double v : report.observable_values) report.abs_errors.push_back(std::abs(v - report.reference));
  report.fitted_order = fit_log_log_slope(report.eps_values, report.abs_errors);
  report.degenerate = std::isnan(report.fitted_order);
}

}  // namespace

MeasurementWindow snap_window(const GridSpec& g1, const GridSpec& g2, const MeasurementWindow& requested) {
  if (!(requested.half_width > 0.0) || !std::isfinite(requested.center)) {
    throw Error(ErrorKind::invalid_argument, "window half-width must be positive and the center finite");
  }
  const GridSpec s = sum_grid(g1, g2);
  if (requested.upper() < s.min() || requested.lower() > s.max()) {
    std::ostringstream os;
    os << "window (" << requested.lower() << ", " << requested.upper()
       << ") does not meet the total-momentum range [" << s.min() << ", " << s.max() << "]";
    throw Error(ErrorKind::zero_probability_window, os.str());
  }
  const SnappedIndex idx = snapped_index(g1, g2, requested);
  if (idx.half < 1) {
    std::ostringstream os;
    os << "window half-width " << requested.half_width << " is below one total-momentum cell (" << s.spacing()
       << ")";
    throw Error(ErrorKind::window_resolution_exceeded, os.str());
  }
  const double h = s.spacing();
  return MeasurementWindow{s.min() + static_cast<double>(idx.center) * h, static_cast<double>(idx.half) * h};
}

WaveFunction2 project(const WaveFunction2& psi, const MeasurementWindow& window) {
  const SnappedIndex idx = snapped_index(psi.grid1, psi.grid2, snap_window(psi.grid1, psi.grid2, window));
  const double lo = static_cast<double>(idx.center - idx.half);
  const double hi = static_cast<double>(idx.center + idx.half);
  constexpr double tol = 1e-9;
  std::vector<Complex> amp(psi.amp.size(), Complex{0.0, 0.0});
  const std::size_t n2 = psi.grid2.size();
  for_each_node(psi.grid1, psi.grid2, [&](std::size_t i, std::size_t j, double t) {
    if (t >= lo - tol && t <= hi + tol) amp[i * n2 + j] = psi.amp[i * n2 + j];
  });
  return WaveFunction2(psi.grid1, psi.grid2, std::move(amp));
}

double band_probability(const Density2& rho, const MeasurementWindow& snapped) {
  const GridSpec s = sum_grid(rho.grid1, rho.grid2);
  const double h = s.spacing();
  const double a = (snapped.lower() - s.min()) / h;
  const double b = (snapped.upper() - s.min()) / h;
  const std::size_t n2 = rho.grid2.size();
  std::vector<double> row_acc(rho.grid1.size(), 0.0);
  for_each_node(rho.grid1, rho.grid2, [&](std::size_t i, std::size_t j, double t) {
    if (t < a - 1.0 || t > b + 1.0) return;
    const double frac = hat_primitive(b - t) - hat_primitive(a - t);
    row_acc[i] += rho.grid2.weight(j) * frac * rho.val[i * n2 + j];
  });
  return trapezoid(rho.grid1, row_acc);
}

PostMeasurementState apply_window(const WaveFunction2& psi, const MeasurementWindow& window) {
  return apply_snapped(psi, density_of(psi), snap_window(psi.grid1, psi.grid2, window));
}

bool projection_idempotence_check(const WaveFunction2& psi, const MeasurementWindow& window) {
  const WaveFunction2 once = project(psi, window);
  const WaveFunction2 twice = project(once, window);
  return std::memcmp(once.amp.data(), twice.amp.data(), once.amp.size() * sizeof(Complex)) == 0;
}

double post_expectation_p1(const PostMeasurementState& state, const Observable1& f) {
  return windowed_mean(state.psi, [&](double p1, double) { return f(p1); });
}

double post_expectation_total(const PostMeasurementState& state, const Observable1& g) {
  return windowed_mean(state.psi, [&](double p1, double p2) { return g(p1 + p2); });
}

double fit_log_log_slope(std::span<const double> eps, std::span<const double> errors) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < eps.size() && k < errors.size(); ++k) {
    if (!(errors[k] > kConvergenceErrorFloor)) continue;
    const double x = std::log(eps[k]);
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (dn * sxy - sx * sy) / denom;
}

ConvergenceReport epsilon_limit_study(const WaveFunction2& psi, double p, const Observable1& f, double eps_start,
                                      int halvings) {
  ConvergenceReport report = run_ladder(psi, p, eps_start, halvings,
                                        [&](const PostMeasurementState& s) { return post_expectation_p1(s, f); });
  report.reference = conditional_expectation(density_of(psi), f, report.center).value;
  finish_report(report);
  return report;
}

ConvergenceReport total_limit_study(const WaveFunction2& psi, double p, const Observable1& g, double eps_start,
                                    int halvings) {
  ConvergenceReport report = run_ladder(psi, p, eps_start, halvings,
                                        [&](const PostMeasurementState& s) { return post_expectation_total(s, g); });
  report.reference = g(report.center);
  finish_report(report);
  return report;
}

void require_window_resolution(const GridSpec& g1, const GridSpec& g2, double eps) {
  const double cell = sum_grid(g1, g2).spacing();
  if (eps < kMinWindowCells * cell * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "half-width " << eps << " spans " << eps / cell << " total-momentum cells; at least " << kMinWindowCells
       << " are required";
    throw Error(ErrorKind::window_resolution_exceeded, os.str());
  }
}

}  // namespace qpredict
