#pragma once

// Two-particle momentum-space states on rectangular grids, the densities they
// induce, and the expectation / variance / mean-square-error primitives.
//
// Units: hbar = 1. Arrays are row-major with the p1 index outermost, so the
// value at (p1_i, p2_j) lives at index i * n2 + j.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qpredict/grid.hpp"

namespace qpredict {

using Complex = std::complex<double>;

struct WaveFunction2 {
  GridSpec grid1;
  GridSpec grid2;
  std::vector<Complex> amp;

  WaveFunction2(GridSpec g1, GridSpec g2, std::vector<Complex> values);

  const Complex& at(std::size_t i, std::size_t j) const { return amp[i * grid2.size() + j]; }
};

struct Density2 {
  GridSpec grid1;
  GridSpec grid2;
  std::vector<double> val;

  Density2(GridSpec g1, GridSpec g2, std::vector<double> values);

  double at(std::size_t i, std::size_t j) const { return val[i * grid2.size() + j]; }
  std::span<const double> row(std::size_t i) const {
    return {val.data() + i * grid2.size(), grid2.size()};
  }
};

struct Density1 {
  GridSpec grid;
  std::vector<double> val;

  Density1(GridSpec g, std::vector<double> values);
};

/// Correlated Gaussian momentum state: equal standard deviation sigma for
/// both momenta, correlation c.
struct GaussianParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma = 1.0;
  double c = 0.0;

  double mu() const noexcept { return mu1 + mu2; }
  /// Throws Error(invalid_argument) unless sigma > 0 and -1 < c < 1.
  void validate() const;
};

/// Real scalar function of one momentum value, drawn from a closed catalog.
///
/// Textual form (also accepted by parse()): `p1` or `p`, `p1^2` or `p^2`,
/// `poly:c0,c1,...`, `ind:a,b` (indicator of the open interval (a, b)).
class Observable1 {
 public:
  enum class Kind { identity, square, polynomial, indicator };

  static Observable1 identity();
  static Observable1 square();
  static Observable1 constant(double value);
  static Observable1 polynomial(std::vector<double> coefficients);
  static Observable1 indicator(double a, double b);
  static Observable1 parse(std::string_view text);

  double operator()(double x) const;
  Kind kind() const noexcept { return kind_; }
  /// Polynomial degree; indicators report 0.
  std::size_t degree() const noexcept;
  std::string to_string() const;

 private:
  Observable1(Kind kind, std::vector<double> coefficients) : kind_(kind), coef_(std::move(coefficients)) {}

  Kind kind_;
  std::vector<double> coef_;
};

/// Observable1 applied to one of the momentum coordinates of the pair.
struct Observable2 {
  enum class Argument { p1, p2, total, product };

  Observable1 fn = Observable1::identity();
  Argument arg = Argument::p1;

  static Observable2 of_p1(Observable1 f) { return {std::move(f), Argument::p1}; }
  static Observable2 of_p2(Observable1 f) { return {std::move(f), Argument::p2}; }
  static Observable2 of_total(Observable1 f) { return {std::move(f), Argument::total}; }
  static Observable2 product() { return {Observable1::identity(), Argument::product}; }
  static Observable2 one() { return {Observable1::constant(1.0), Argument::p1}; }

  double operator()(double p1, double p2) const;
};

/// Standard bivariate normal density with means (mu1, mu2), common standard
/// deviation sigma and correlation c.
double gaussian_density(const GaussianParams& params, double p1, double p2);

/// Upper bound on the Gaussian mass that falls outside the grid rectangle.
double gaussian_missed_mass(const GaussianParams& params, const GridSpec& g1, const GridSpec& g2);

/// Number of standard deviations by which the grids cover each mean (minimum over axes).
double gaussian_coverage_sigmas(const GaussianParams& params, const GridSpec& g1, const GridSpec& g2);

/// Psi = sqrt(rho) with zero phase, renormalized on the grid.
/// Throws Error(coverage_too_small) when the grids miss more than 1e-6 of the mass.
WaveFunction2 gaussian_wavefunction(const GaussianParams& params, const GridSpec& g1, const GridSpec& g2);

struct MixtureComponent {
  double weight;
  GaussianParams params;
};

/// Psi = sqrt(sum_k w_k rho_k), renormalized; weights must be positive.
WaveFunction2 mixture_wavefunction(std::span<const MixtureComponent> components, const GridSpec& g1,
                                   const GridSpec& g2);

/// Squared L2 norm under the two-dimensional trapezoid rule.
double norm_squared(const WaveFunction2& psi);

WaveFunction2 normalize(WaveFunction2 psi);

Density2 density_of(const WaveFunction2& psi);

double total_mass(const Density2& rho);
double total_mass(const Density1& rho);

double expectation(const Density2& rho, const Observable2& f);

/// E[f^2] - E[f]^2, clamped at zero when it is negative by less than 1e-10.
double variance(const Density2& rho, const Observable2& f);

/// E[(f - m)^2].
double mse_at(const Density2& rho, const Observable2& f, double m);

}  // namespace qpredict
