#include "qpredict/gaussian_analytic.hpp"

#include <algorithm>
#include <cmath>

#include "qpredict/conditional.hpp"

namespace qpredict {

CovarianceMatrix sigma_matrix(const GaussianParams& params) {
  params.validate();
  const double s2 = params.sigma * params.sigma;
  return CovarianceMatrix{s2, s2 * (1.0 + params.c), 2.0 * s2 * (1.0 + params.c)};
}

Matrix2 sigma_inverse(const GaussianParams& params) {
  params.validate();
  const double c = params.c;
  const double scale = 1.0 / (params.sigma * params.sigma * (1.0 - c * c));
  return Matrix2{{{scale * 2.0 * (1.0 + c), -scale * (1.0 + c)}, {-scale * (1.0 + c), scale}}};
}

double sigma_inverse_check(const GaussianParams& params) {
  const CovarianceMatrix s = sigma_matrix(params);
  const Matrix2 sigma{{{s.s11, s.s12}, {s.s12, s.s22}}};
  const Matrix2 inv = sigma_inverse(params);
  double worst = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double prod = sigma[r][0] * inv[0][c] + sigma[r][1] * inv[1][c];
      worst = std::max(worst, std::abs(prod - (r == c ? 1.0 : 0.0)));
    }
  }
  return worst;
}

double linear_predictor_p1(const GaussianParams& params, double p) {
  const CovarianceMatrix s = sigma_matrix(params);
  return summable_split(p, params.mu1 + (s.s12 / s.s22) * (p - params.mu()));
}

double linear_predictor_p2(const GaussianParams& params, double p) {
  return p - linear_predictor_p1(params, p);
}

double conditional_variance_p1(const GaussianParams& params) {
  const CovarianceMatrix s = sigma_matrix(params);
  return s.s11 - s.s12 * s.s12 / s.s22;
}

TotalMoments total_moments(const GaussianParams& params) {
  const CovarianceMatrix s = sigma_matrix(params);
  return TotalMoments{params.mu(), s.s22};
}

}  // namespace qpredict
