#include "qpredict/position.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qpredict/error.hpp"
#include "qpredict/measurement.hpp"

namespace qpredict {

namespace {

static_assert(sizeof(Complex) == sizeof(fftw_complex));

fftw_complex* as_fftw(std::vector<Complex>& v) { return reinterpret_cast<fftw_complex*>(v.data()); }

class FftwPlan {
 public:
  explicit FftwPlan(fftw_plan plan) : plan_(plan) {
    if (!plan_) throw Error(ErrorKind::invalid_argument, "FFTW could not create a plan");
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  ~FftwPlan() { fftw_destroy_plan(plan_); }

  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

GridSpec dual_grid(const GridSpec& p) {
  const double n = static_cast<double>(p.size());
  const double dx = 2.0 * std::numbers::pi / (n * p.spacing());
  return make_grid(-0.5 * n * dx, (0.5 * n - 1.0) * dx, p.size());
}

// In-place 1D transforms along the x1 axis (stride n2) for every column.
void fft_axis0(std::vector<Complex>& data, std::size_t n1, std::size_t n2, int sign) {
  const int n = static_cast<int>(n1);
  FftwPlan plan(fftw_plan_many_dft(1, &n, static_cast<int>(n2), as_fftw(data), nullptr, static_cast<int>(n2), 1,
                                   as_fftw(data), nullptr, static_cast<int>(n2), 1, sign, FFTW_ESTIMATE));
  plan.execute();
}

struct Moments {
  double mean;
  double var;
};

Moments finish(double mass, double first, double second) {
  const double mean = first / mass;
  return {mean, std::max(0.0, second / mass - mean * mean)};
}

}  // namespace

double PositionState::norm_squared() const {
  double acc = 0.0;
  for (const Complex& a : amp) acc += std::norm(a);
  return acc * xgrid1.spacing() * xgrid2.spacing();
}

PositionState to_position(const WaveFunction2& psi) {
  const std::size_t n1 = psi.grid1.size();
  const std::size_t n2 = psi.grid2.size();
  if (n1 % 2 != 0 || n2 % 2 != 0) {
    throw Error(ErrorKind::odd_grid, "spectral transform needs even point counts on both axes");
  }
  // exp(i p_k x_m) = exp(i p_min x_m) exp(2 pi i k m / n) (-1)^k on the dual grid.
  std::vector<Complex> data(psi.amp);
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      if ((i + j) % 2 == 1) data[i * n2 + j] = -data[i * n2 + j];

  FftwPlan plan(fftw_plan_dft_2d(static_cast<int>(n1), static_cast<int>(n2), as_fftw(data), as_fftw(data),
                                 FFTW_BACKWARD, FFTW_ESTIMATE));
  plan.execute();

  const GridSpec x1 = dual_grid(psi.grid1);
  const GridSpec x2 = dual_grid(psi.grid2);
  const double scale = psi.grid1.spacing() * psi.grid2.spacing() / (2.0 * std::numbers::pi);
  std::vector<Complex> phase2(n2);
  for (std::size_t l = 0; l < n2; ++l) phase2[l] = std::polar(1.0, psi.grid2.min() * x2.node(l));
  for (std::size_t m = 0; m < n1; ++m) {
    const Complex phase1 = std::polar(scale, psi.grid1.min() * x1.node(m));
    for (std::size_t l = 0; l < n2; ++l) data[m * n2 + l] *= phase1 * phase2[l];
  }
  return PositionState{x1, x2, psi.grid1, psi.grid2, std::move(data)};
}

MomentPair spectral_p1_moments(const PositionState& pos) {
  const std::size_t n1 = pos.xgrid1.size();
  const std::size_t n2 = pos.xgrid2.size();
  // Strip the band offset exp(i p_min x1), differentiate mode by mode, restore it.
  std::vector<Complex> work(pos.amp);
  for (std::size_t m = 0; m < n1; ++m) {
    const Complex demod = std::polar(1.0, -pos.pgrid1.min() * pos.xgrid1.node(m));
    for (std::size_t l = 0; l < n2; ++l) work[m * n2 + l] *= demod;
  }
  fft_axis0(work, n1, n2, FFTW_FORWARD);
  // Forward index k of the demodulated signal carries e^{-2 pi i k m / n} conjugate to
  // the backward synthesis with (-1)^k folded in, i.e. momentum p_min + k dp.
  for (std::size_t k = 0; k < n1; ++k) {
    const double p = pos.pgrid1.node(k);
    for (std::size_t l = 0; l < n2; ++l) work[k * n2 + l] *= p / static_cast<double>(n1);
  }
  fft_axis0(work, n1, n2, FFTW_BACKWARD);
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
  for (std::size_t m = 0; m < n1; ++m) {
    const Complex remod = std::polar(1.0, pos.pgrid1.min() * pos.xgrid1.node(m));
    for (std::size_t l = 0; l < n2; ++l) {
      const Complex psi = pos.amp[m * n2 + l];
      const Complex dpsi = work[m * n2 + l] * remod;
      mass += std::norm(psi);
      first += (std::conj(psi) * dpsi).real();
      second += std::norm(dpsi);
    }
  }
  return MomentPair{first / mass, second / mass};
}

UncertaintyReport uncertainty_report(const WaveFunction2& psi, double m1, double m2) {
  if (!(m1 > 0.0) || !(m2 > 0.0)) throw Error(ErrorKind::invalid_argument, "masses must be positive");
  const Density2 rho = density_of(psi);
  const double mass_p = total_mass(rho);
  auto p_sd = [&](const Observable2& f) {
    const double mean = expectation(rho, f) / mass_p;
    const double second = expectation(rho, Observable2{Observable1::square(), f.arg}) / mass_p;
    return std::sqrt(std::max(0.0, second - mean * mean));
  };

  const PositionState pos = to_position(psi);
  const std::size_t n1 = pos.xgrid1.size();
  const std::size_t n2 = pos.xgrid2.size();
  const double mt = m1 + m2;
  double mass = 0.0, s1 = 0.0, s11 = 0.0, s2 = 0.0, s22 = 0.0, sc = 0.0, scc = 0.0;
  for (std::size_t m = 0; m < n1; ++m) {
    const double x1 = pos.xgrid1.node(m);
    for (std::size_t l = 0; l < n2; ++l) {
      const double x2 = pos.xgrid2.node(l);
      const double d = std::norm(pos.at(m, l));
      const double xc = (m1 * x1 + m2 * x2) / mt;
      mass += d;
      s1 += d * x1;
      s11 += d * x1 * x1;
      s2 += d * x2;
      s22 += d * x2 * x2;
      sc += d * xc;
      scc += d * xc * xc;
    }
  }
  const Moments mx1 = finish(mass, s1, s11);
  const Moments mx2 = finish(mass, s2, s22);
  const Moments mxc = finish(mass, sc, scc);

  UncertaintyReport r{};
  r.sd_p1 = p_sd(Observable2::of_p1(Observable1::identity()));
  r.sd_p2 = p_sd(Observable2::of_p2(Observable1::identity()));
  r.sd_ptotal = p_sd(Observable2::of_total(Observable1::identity()));
  r.sd_x1 = std::sqrt(mx1.var);
  r.sd_x2 = std::sqrt(mx2.var);
  r.sd_xcm = std::sqrt(mxc.var);
  r.m1 = m1;
  r.m2 = m2;
  return r;
}

bool CmLadder::sd_xcm_strictly_increasing() const {
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (!(rows[k].sd_xcm > rows[k - 1].sd_xcm)) return false;
  return true;
}

bool CmLadder::sd_ptotal_strictly_decreasing() const {
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (!(rows[k].sd_ptotal < rows[k - 1].sd_ptotal)) return false;
  return true;
}

double CmLadder::min_product() const {
  double best = INFINITY;
  for (const auto& row : rows) best = std::min(best, row.sd_xcm * row.sd_ptotal);
  return best;
}

CmLadder cm_variance_vs_epsilon(const WaveFunction2& psi, double p, std::span<const double> eps_list, double m1,
                                double m2) {
  if (eps_list.empty()) throw Error(ErrorKind::invalid_argument, "epsilon list is empty");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) {
      throw Error(ErrorKind::invalid_argument, "epsilon list must be strictly decreasing");
    }
    require_window_resolution(psi.grid1, psi.grid2, eps_list[k]);
  }
  CmLadder ladder;
  for (double eps : eps_list) {
    const PostMeasurementState post = apply_window(psi, {p, eps});
    const UncertaintyReport r = uncertainty_report(post.psi, m1, m2);
    ladder.rows.push_back(CmLadderRow{eps, post.window.half_width, post.norm_prob, r.sd_ptotal, r.sd_xcm});
  }
  return ladder;
}

}  // namespace qpredict
