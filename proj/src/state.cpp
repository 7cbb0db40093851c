#include "qpredict/state.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qpredict/error.hpp"

namespace qpredict {

namespace {

void check_shape(const GridSpec& g1, const GridSpec& g2, std::size_t size, const char* what) {
  if (size != g1.size() * g2.size()) {
    throw Error(ErrorKind::invalid_argument,
                std::string(what) + ": value array has " + std::to_string(size) + " entries, expected " +
                    std::to_string(g1.size() * g2.size()));
  }
}

template <class Fn>
double double_trapezoid(const GridSpec& g1, const GridSpec& g2, Fn&& integrand) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < g2.size(); ++j) row += g2.weight(j) * integrand(i, j);
    acc += g1.weight(i) * row;
  }
  return acc;
}

double parse_number(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorKind::parse_error, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_number(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

WaveFunction2::WaveFunction2(GridSpec g1, GridSpec g2, std::vector<Complex> values)
    : grid1(g1), grid2(g2), amp(std::move(values)) {
  check_shape(grid1, grid2, amp.size(), "WaveFunction2");
}

Density2::Density2(GridSpec g1, GridSpec g2, std::vector<double> values)
    : grid1(g1), grid2(g2), val(std::move(values)) {
  check_shape(grid1, grid2, val.size(), "Density2");
}

Density1::Density1(GridSpec g, std::vector<double> values) : grid(g), val(std::move(values)) {
  if (val.size() != grid.size()) {
    throw Error(ErrorKind::invalid_argument, "Density1: value array does not match grid");
  }
}

void GaussianParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::invalid_argument, "gaussian sigma must be positive");
  }
  if (!(c > -1.0 && c < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "gaussian correlation must lie in (-1, 1)");
  }
  if (!std::isfinite(mu1) || !std::isfinite(mu2)) {
    throw Error(ErrorKind::invalid_argument, "gaussian means must be finite");
  }
}

// ---- observables ------------------------------------------------------------

Observable1 Observable1::identity() { return {Kind::identity, {0.0, 1.0}}; }
Observable1 Observable1::square() { return {Kind::square, {0.0, 0.0, 1.0}}; }
Observable1 Observable1::constant(double value) { return {Kind::polynomial, {value}}; }

Observable1 Observable1::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) {
    throw Error(ErrorKind::invalid_argument, "polynomial observable needs at least one coefficient");
  }
  return {Kind::polynomial, std::move(coefficients)};
}

Observable1 Observable1::indicator(double a, double b) {
  if (!(a < b)) throw Error(ErrorKind::invalid_argument, "indicator interval must satisfy a < b");
  return {Kind::indicator, {a, b}};
}

Observable1 Observable1::parse(std::string_view text) {
  if (text == "p1" || text == "p") return identity();
  if (text == "p1^2" || text == "p^2") return square();
  if (text.starts_with("poly:")) return polynomial(parse_list(text.substr(5)));
  if (text.starts_with("ind:")) {
    const auto bounds = parse_list(text.substr(4));
    if (bounds.size() != 2) throw Error(ErrorKind::parse_error, "ind: expects exactly two bounds");
    return indicator(bounds[0], bounds[1]);
  }
  throw Error(ErrorKind::parse_error, "unknown observable '" + std::string(text) + "'");
}

double Observable1::operator()(double x) const {
  if (kind_ == Kind::indicator) return (x > coef_[0] && x < coef_[1]) ? 1.0 : 0.0;
  double acc = 0.0;
  for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::size_t Observable1::degree() const noexcept {
  return kind_ == Kind::indicator ? 0 : coef_.size() - 1;
}

std::string Observable1::to_string() const {
  switch (kind_) {
    case Kind::identity:
      return "p1";
    case Kind::square:
      return "p1^2";
    case Kind::indicator:
      return "ind:" + format_number(coef_[0]) + "," + format_number(coef_[1]);
    case Kind::polynomial:
      break;
  }
  std::string out = "poly:";
  for (std::size_t k = 0; k < coef_.size(); ++k) {
    if (k) out += ",";
    out += format_number(coef_[k]);
  }
  return out;
}

double Observable2::operator()(double p1, double p2) const {
  switch (arg) {
    case Argument::p1:
      return fn(p1);
    case Argument::p2:
      return fn(p2);
    case Argument::total:
      return fn(p1 + p2);
    case Argument::product:
      return fn(p1 * p2);
  }
  return 0.0;
}

// ---- Gaussian states ---------------------------------------------------------

double gaussian_density(const GaussianParams& params, double p1, double p2) {
  const double s2 = params.sigma * params.sigma;
  const double one_minus_c2 = 1.0 - params.c * params.c;
  const double x = p1 - params.mu1;
  const double y = p2 - params.mu2;
  const double q = (x * x - 2.0 * params.c * x * y + y * y) / (s2 * one_minus_c2);
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * s2 * std::sqrt(one_minus_c2));
}

double gaussian_missed_mass(const GaussianParams& params, const GridSpec& g1, const GridSpec& g2) {
  // Each marginal is N(mu_i, sigma^2); union bound over the four half-lines.
  auto tail = [&](double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); };
  const double s = params.sigma;
  return tail((params.mu1 - g1.min()) / s) + tail((g1.max() - params.mu1) / s) +
         tail((params.mu2 - g2.min()) / s) + tail((g2.max() - params.mu2) / s);
}

double gaussian_coverage_sigmas(const GaussianParams& params, const GridSpec& g1, const GridSpec& g2) {
  const double s = params.sigma;
  return std::min({(params.mu1 - g1.min()) / s, (g1.max() - params.mu1) / s, (params.mu2 - g2.min()) / s,
                   (g2.max() - params.mu2) / s});
}

namespace {

constexpr double kMaxMissedMass = 1e-6;

template <class DensityFn>
WaveFunction2 sqrt_density_state(const GridSpec& g1, const GridSpec& g2, DensityFn&& rho) {
  std::vector<Complex> amp(g1.size() * g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double p1 = g1.node(i);
    for (std::size_t j = 0; j < g2.size(); ++j) amp[i * g2.size() + j] = std::sqrt(rho(p1, g2.node(j)));
  }
  return normalize(WaveFunction2(g1, g2, std::move(amp)));
}

}  // namespace

WaveFunction2 gaussian_wavefunction(const GaussianParams& params, const GridSpec& g1, const GridSpec& g2) {
  params.validate();
  const double missed = gaussian_missed_mass(params, g1, g2);
  if (missed > kMaxMissedMass) {
    throw Error(ErrorKind::coverage_too_small,
                "grid misses up to " + format_number(missed) + " of the Gaussian mass");
  }
  return sqrt_density_state(g1, g2, [&](double p1, double p2) { return gaussian_density(params, p1, p2); });
}

WaveFunction2 mixture_wavefunction(std::span<const MixtureComponent> components, const GridSpec& g1,
                                   const GridSpec& g2) {
  if (components.empty()) throw Error(ErrorKind::invalid_argument, "mixture needs at least one component");
  double weight_sum = 0.0;
  double missed = 0.0;
  for (const auto& comp : components) {
    comp.params.validate();
    if (!(comp.weight > 0.0)) throw Error(ErrorKind::invalid_argument, "mixture weights must be positive");
    weight_sum += comp.weight;
    missed += comp.weight * gaussian_missed_mass(comp.params, g1, g2);
  }
  if (missed / weight_sum > kMaxMissedMass) {
    throw Error(ErrorKind::coverage_too_small,
                "grid misses up to " + format_number(missed / weight_sum) + " of the mixture mass");
  }
  return sqrt_density_state(g1, g2, [&](double p1, double p2) {
    double acc = 0.0;
    for (const auto& comp : components) acc += comp.weight * gaussian_density(comp.params, p1, p2);
    return acc / weight_sum;
  });
}

double norm_squared(const WaveFunction2& psi) {
  return double_trapezoid(psi.grid1, psi.grid2, [&](std::size_t i, std::size_t j) { return std::norm(psi.at(i, j)); });
}

WaveFunction2 normalize(WaveFunction2 psi) {
  const double n2 = norm_squared(psi);
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw Error(ErrorKind::invalid_argument, "cannot normalize a state with zero or non-finite norm");
  }
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& a : psi.amp) a *= scale;
  return psi;
}

Density2 density_of(const WaveFunction2& psi) {
  std::vector<double> val(psi.amp.size());
  std::transform(psi.amp.begin(), psi.amp.end(), val.begin(), [](const Complex& a) { return std::norm(a); });
  return Density2(psi.grid1, psi.grid2, std::move(val));
}

double total_mass(const Density2& rho) {
  return double_trapezoid(rho.grid1, rho.grid2, [&](std::size_t i, std::size_t j) { return rho.at(i, j); });
}

double total_mass(const Density1& rho) { return trapezoid(rho.grid, rho.val); }

double expectation(const Density2& rho, const Observable2& f) {
  return double_trapezoid(rho.grid1, rho.grid2, [&](std::size_t i, std::size_t j) {
    return f(rho.grid1.node(i), rho.grid2.node(j)) * rho.at(i, j);
  });
}

double variance(const Density2& rho, const Observable2& f) {
  const double second = double_trapezoid(rho.grid1, rho.grid2, [&](std::size_t i, std::size_t j) {
    const double v = f(rho.grid1.node(i), rho.grid2.node(j));
    return v * v * rho.at(i, j);
  });
  const double mean = expectation(rho, f);
  const double var = second - mean * mean;
  if (var < 0.0 && var > -1e-10) return 0.0;
  return var;
}

double mse_at(const Density2& rho, const Observable2& f, double m) {
  return double_trapezoid(rho.grid1, rho.grid2, [&](std::size_t i, std::size_t j) {
    const double d = f(rho.grid1.node(i), rho.grid2.node(j)) - m;
    return d * d * rho.at(i, j);
  });
}

}  // namespace qpredict
