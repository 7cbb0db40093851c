#pragma once

// Closed-form results for the correlated Gaussian state in the centered
// coordinates xi = p1 - mu1 and zeta = (p1 + p2) - mu.

#include <array>

#include "qpredict/state.hpp"

namespace qpredict {

/// Symmetric 2x2 covariance of (xi, zeta).
struct CovarianceMatrix {
  double s11;
  double s12;
  double s22;

  double determinant() const noexcept { return s11 * s22 - s12 * s12; }
  bool positive_definite() const noexcept { return s11 > 0.0 && s22 > 0.0 && determinant() > 0.0; }
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// (sigma^2, sigma^2 (1 + c), 2 sigma^2 (1 + c)).
CovarianceMatrix sigma_matrix(const GaussianParams& params);

/// The inverse written out entrywise:
/// 1 / (sigma^2 (1 - c^2)) * [[2(1 + c), -(1 + c)], [-(1 + c), 1]].
Matrix2 sigma_inverse(const GaussianParams& params);

/// Sup-norm of Sigma * Sigma^-1 - I using the two closed forms above.
double sigma_inverse_check(const GaussianParams& params);

/// mu1 + (s12 / s22) (p - mu); the coefficient is exactly 1/2 for equal variances.
/// The result passes through summable_split, so the two predictors add up to p bitwise.
double linear_predictor_p1(const GaussianParams& params, double p);

/// p - linear_predictor_p1(params, p) = (p + (mu2 - mu1)) / 2.
double linear_predictor_p2(const GaussianParams& params, double p);

/// Schur complement s11 - s12^2 / s22 = sigma^2 (1 - c) / 2.
double conditional_variance_p1(const GaussianParams& params);

struct TotalMoments {
  double mean;
  double variance;
};

/// (mu1 + mu2, 2 sigma^2 (1 + c)).
TotalMoments total_moments(const GaussianParams& params);

}  // namespace qpredict
