#include "qpredict/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "qpredict/error.hpp"
#include "qpredict/parallel.hpp"
#include "qpredict/philox.hpp"

namespace qpredict {

namespace {

constexpr std::uint32_t kGaussianStream = 0x6761u;
constexpr std::uint32_t kGridStream = 0x6772u;

class Fnv1a {
 public:
  void add(const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < len; ++k) {
      hash_ ^= bytes[k];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(double x) { add(&x, sizeof x); }
  void add(std::uint64_t x) { add(&x, sizeof x); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

PhiloxCounter draw(std::uint64_t index, std::uint32_t stream, std::uint64_t seed) {
  return philox4x32_10({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, 0u},
                       {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
}

// Root in [0, h] of a x + (b - a) x^2 / (2 h) = r for a linear density rising
// from a to b over a cell of width h; stable for b ~ a.
double invert_linear_cell(double a, double b, double h, double r) {
  const double disc = std::max(0.0, a * a + 2.0 * (b - a) * r / h);
  const double denom = a + std::sqrt(disc);
  const double x = denom > 0.0 ? 2.0 * r / denom : 0.0;
  return std::clamp(x, 0.0, h);
}

// Grid sampler tables: cumulative trapezoid masses of the p1 marginal and of every row.
struct GridTables {
  std::vector<double> marginal;      // row integrals over p2
  std::vector<double> marginal_cum;  // cumulative mass of the p1 marginal at each node
  std::vector<double> row_cum;       // n1 x n2 cumulative row integrals
};

GridTables build_tables(const Density2& rho) {
  const std::size_t n1 = rho.grid1.size();
  const std::size_t n2 = rho.grid2.size();
  const double h1 = rho.grid1.spacing();
  const double h2 = rho.grid2.spacing();
  GridTables t;
  t.marginal.resize(n1);
  t.marginal_cum.resize(n1);
  t.row_cum.resize(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    const auto row = rho.row(i);
    double* cum = t.row_cum.data() + i * n2;
    cum[0] = 0.0;
    for (std::size_t j = 1; j < n2; ++j) cum[j] = cum[j - 1] + 0.5 * h2 * (row[j - 1] + row[j]);
    t.marginal[i] = cum[n2 - 1];
  }
  t.marginal_cum[0] = 0.0;
  for (std::size_t i = 1; i < n1; ++i)
    t.marginal_cum[i] = t.marginal_cum[i - 1] + 0.5 * h1 * (t.marginal[i - 1] + t.marginal[i]);
  return t;
}

std::array<double, 2> draw_from_grid(const Density2& rho, const GridTables& t, double u, double v) {
  const std::size_t n1 = rho.grid1.size();
  const std::size_t n2 = rho.grid2.size();
  const double h1 = rho.grid1.spacing();
  const double h2 = rho.grid2.spacing();

  const double target1 = u * t.marginal_cum[n1 - 1];
  auto it = std::upper_bound(t.marginal_cum.begin(), t.marginal_cum.end(), target1);
  std::size_t i = it == t.marginal_cum.begin() ? 0 : static_cast<std::size_t>(it - t.marginal_cum.begin()) - 1;
  i = std::min(i, n1 - 2);
  const double x1 = invert_linear_cell(t.marginal[i], t.marginal[i + 1], h1, target1 - t.marginal_cum[i]);
  const double frac = x1 / h1;

  // The conditional slice at p1 is the linear blend of rows i and i + 1.
  const double* c0 = t.row_cum.data() + i * n2;
  const double* c1 = c0 + n2;
  auto blended = [&](std::size_t j) { return (1.0 - frac) * c0[j] + frac * c1[j]; };
  const double target2 = v * blended(n2 - 1);
  std::size_t lo = 0;
  std::size_t hi = n2 - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (blended(mid) <= target2) lo = mid;
    else hi = mid;
  }
  const auto r0 = rho.row(i);
  const auto r1 = rho.row(i + 1);
  const double a = (1.0 - frac) * r0[lo] + frac * r1[lo];
  const double b = (1.0 - frac) * r0[lo + 1] + frac * r1[lo + 1];
  const double x2 = invert_linear_cell(a, b, h2, target2 - blended(lo));
  return {rho.grid1.node(i) + x1, rho.grid2.node(lo) + x2};
}

}  // namespace

SampleSet sample(const GaussianParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  if (n < 1) throw Error(ErrorKind::invalid_argument, "sample count must be at least 1");
  Fnv1a h;
  h.add(params.mu1);
  h.add(params.mu2);
  h.add(params.sigma);
  h.add(params.c);
  SampleSet out{seed, h.value(), std::vector<std::array<double, 2>>(n)};
  const double tail = std::sqrt(1.0 - params.c * params.c);
  parallel_for_chunks(n, kSampleChunk, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const PhiloxCounter r = draw(k, kGaussianStream, seed);
      const double u1 = open_unit(r[0], r[1]);
      const double u2 = open_unit(r[2], r[3]);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      const double z1 = radius * std::cos(angle);
      const double z2 = radius * std::sin(angle);
      out.points[k] = {params.mu1 + params.sigma * z1, params.mu2 + params.sigma * (params.c * z1 + tail * z2)};
    }
  });
  return out;
}

SampleSet sample(const Density2& rho, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "sample count must be at least 1");
  const GridTables tables = build_tables(rho);
  if (!(tables.marginal_cum.back() > 0.0)) throw Error(ErrorKind::invalid_argument, "density has zero mass");
  Fnv1a h;
  for (const GridSpec* g : {&rho.grid1, &rho.grid2}) {
    h.add(g->min());
    h.add(g->max());
    h.add(static_cast<std::uint64_t>(g->size()));
  }
  h.add(rho.val.data(), rho.val.size() * sizeof(double));
  SampleSet out{seed, h.value(), std::vector<std::array<double, 2>>(n)};
  parallel_for_chunks(n, kSampleChunk, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const PhiloxCounter r = draw(k, kGridStream, seed);
      out.points[k] = draw_from_grid(rho, tables, open_unit(r[0], r[1]), open_unit(r[2], r[3]));
    }
  });
  return out;
}

EmpiricalEstimate empirical_conditional(const SampleSet& samples, const MeasurementWindow& window,
                                        const Observable1& g) {
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<double> values;
  for (const auto& pt : samples.points) {
    const double total = pt[0] + pt[1];
    if (total > window.lower() && total < window.upper()) {
      values.push_back(g(pt[0]));
      sum += values.back();
      ++count;
    }
  }
  if (count < kMinAccepted) {
    throw Error(ErrorKind::too_few_accepted, "only " + std::to_string(count) + " samples fall in the window; need " +
                                                 std::to_string(kMinAccepted));
  }
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(count - 1));
  return EmpiricalEstimate{mean, sd / std::sqrt(static_cast<double>(count)), count, window};
}

double EmpiricalTotalDensity::mass() const noexcept {
  double acc = 0.0;
  for (double d : density) acc += d * bin_width;
  return acc;
}

EmpiricalTotalDensity empirical_total_density(const SampleSet& samples, std::size_t bins) {
  if (bins < 10) throw Error(ErrorKind::invalid_argument, "histogram needs at least 10 bins");
  const std::size_t n = samples.n();
  if (n < 2) throw Error(ErrorKind::invalid_argument, "histogram needs at least two samples");
  double lo = INFINITY;
  double hi = -INFINITY;
  double sum = 0.0;
  for (const auto& pt : samples.points) {
    const double s = pt[0] + pt[1];
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    sum += s;
  }
  const double dn = static_cast<double>(n);
  const double mean = sum / dn;
  if (!(hi > lo)) hi = lo + 1.0;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  double m2 = 0.0;
  double m4 = 0.0;
  for (const auto& pt : samples.points) {
    const double s = pt[0] + pt[1];
    auto b = static_cast<std::size_t>((s - lo) / width);
    counts[std::min(b, bins - 1)] += 1.0;
    const double d2 = (s - mean) * (s - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  for (double& c : counts) c /= dn * width;
  const double var_biased = m2 / dn;
  const double se = std::sqrt(std::max(0.0, m4 / dn - var_biased * var_biased) / dn);
  return EmpiricalTotalDensity{lo, width, std::move(counts), n, mean, m2 / (dn - 1.0), se};
}

}  // namespace qpredict
