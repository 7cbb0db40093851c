#include "qpredict/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "qpredict/conditional.hpp"
#include "qpredict/error.hpp"
#include "qpredict/gaussian_analytic.hpp"
#include "qpredict/io.hpp"
#include "qpredict/measurement.hpp"
#include "qpredict/monte_carlo.hpp"
#include "qpredict/position.hpp"

namespace qpredict {

using nlohmann::json;

namespace {

struct CommandName {
  Command command;
  const char* name;
};

constexpr CommandName kCommands[] = {
    {Command::marginal, "marginal"}, {Command::condexp, "condexp"},         {Command::measure, "measure"},
    {Command::converge, "converge"}, {Command::gaussian, "gaussian"},       {Command::uncertainty, "uncertainty"},
    {Command::sample, "sample"},     {Command::report, "report"},
};

// Tolerances of the walkthrough verdicts.
constexpr double kMassTol = 1e-6;
constexpr double kMomentRelTol = 1e-3;
constexpr double kPredictorTol = 1e-3;
constexpr double kOrderLo = 1.7;
constexpr double kOrderHi = 2.3;
constexpr double kFinalErrorTol = 5e-4;
constexpr double kProductTol = 1e-3;
constexpr double kCmProductTol = 1e-2;

double require(const std::optional<double>& v, const char* flag) {
  if (!v) throw Error(ErrorKind::invalid_config, std::string("this command requires --") + flag);
  if (!std::isfinite(*v)) throw Error(ErrorKind::invalid_config, std::string("--") + flag + " must be finite");
  return *v;
}

MeasurementWindow parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::invalid_config, "--window expects a:b");
  double a = 0.0, b = 0.0;
  try {
    std::size_t used_a = 0, used_b = 0;
    const std::string sa = text.substr(0, colon);
    const std::string sb = text.substr(colon + 1);
    a = std::stod(sa, &used_a);
    b = std::stod(sb, &used_b);
    if (used_a != sa.size() || used_b != sb.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorKind::invalid_config, "--window bounds are not numbers: '" + text + "'");
  }
  if (!(a < b)) throw Error(ErrorKind::invalid_config, "--window requires a < b");
  return MeasurementWindow{0.5 * (a + b), 0.5 * (b - a)};
}

json window_json(const MeasurementWindow& w) {
  return {{"center", w.center}, {"half_width", w.half_width}, {"lower", w.lower()}, {"upper", w.upper()}};
}

json report_json(const UncertaintyReport& r) {
  const double bound = kUncertaintyBound;
  return {
      {"sd_p1", r.sd_p1},
      {"sd_x1", r.sd_x1},
      {"sd_p2", r.sd_p2},
      {"sd_x2", r.sd_x2},
      {"sd_ptotal", r.sd_ptotal},
      {"sd_xcm", r.sd_xcm},
      {"m1", r.m1},
      {"m2", r.m2},
      {"products", {{"x1_p1", r.product_1()}, {"x2_p2", r.product_2()}, {"xcm_ptotal", r.product_cm()}}},
      {"bound", bound},
      {"pass",
       {{"x1_p1", r.product_1() >= bound * (1.0 - kProductTol)},
        {"x2_p2", r.product_2() >= bound * (1.0 - kProductTol)},
        {"xcm_ptotal", r.product_cm() >= bound * (1.0 - kCmProductTol)}}},
  };
}

json ladder_json(const CmLadder& ladder) {
  json rows = json::array();
  for (const auto& row : ladder.rows) {
    rows.push_back({{"eps", row.eps},
                    {"eps_effective", row.eps_effective},
                    {"norm_prob", row.norm_prob},
                    {"sd_ptotal", row.sd_ptotal},
                    {"sd_xcm", row.sd_xcm},
                    {"product", row.sd_ptotal * row.sd_xcm}});
  }
  return {{"rows", rows},
          {"sd_xcm_strictly_increasing", ladder.sd_xcm_strictly_increasing()},
          {"sd_ptotal_strictly_decreasing", ladder.sd_ptotal_strictly_decreasing()},
          {"min_product", ladder.min_product()},
          {"pass", ladder.sd_xcm_strictly_increasing() && ladder.sd_ptotal_strictly_decreasing() &&
                       ladder.min_product() >= kUncertaintyBound * (1.0 - kCmProductTol)}};
}

json convergence_json(const ConvergenceReport& r) {
  json rows = json::array();
  for (std::size_t k = 0; k < r.eps_values.size(); ++k) {
    rows.push_back({{"eps", r.eps_values[k]}, {"value", r.observable_values[k]}, {"abs_error", r.abs_errors[k]}});
  }
  json out = {{"center", r.center}, {"reference", r.reference}, {"degenerate", r.degenerate}, {"ladder", rows}};
  out["fitted_order"] = r.degenerate ? json(nullptr) : json(r.fitted_order);
  return out;
}

std::string convergence_csv(const ConvergenceReport& r) {
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < r.eps_values.size(); ++k)
    rows.push_back({r.eps_values[k], r.observable_values[k], r.abs_errors[k]});
  return csv_table({"eps", "value", "abs_error"}, rows);
}

bool convergence_passes(const ConvergenceReport& r) {
  const double final_error = r.abs_errors.back();
  if (r.degenerate) return final_error <= kConvergenceErrorFloor;
  return r.fitted_order >= kOrderLo && r.fitted_order <= kOrderHi && final_error <= kFinalErrorTol;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

LoadedState load_for(const RunConfig& config) {
  if (config.state_path) return load_state(*config.state_path);
  if (config.command == Command::report) return parse_state(default_state_json(), ".");
  throw Error(ErrorKind::invalid_config, "this command requires --state");
}

// ---- commands -----------------------------------------------------------------

json cmd_marginal(const RunConfig&, const LoadedState& st, ArtifactSet& files) {
  const Density2 rho = density_of(st.psi);
  const Density1 m = marginal_total(rho);
  std::vector<std::vector<double>> rows;
  double first = 0.0, second = 0.0;
  for (std::size_t k = 0; k < m.grid.size(); ++k) {
    const double p = m.grid.node(k);
    rows.push_back({p, m.val[k]});
    first += m.grid.weight(k) * p * m.val[k];
    second += m.grid.weight(k) * p * p * m.val[k];
  }
  const double mass = total_mass(m);
  files.add("marginal.csv", csv_table({"p", "value"}, rows));
  return {{"mass", mass},
          {"mean", first / mass},
          {"variance", second / mass - (first / mass) * (first / mass)},
          {"grid", {{"min", m.grid.min()}, {"max", m.grid.max()}, {"n", m.grid.size()}}}};
}

json cmd_condexp(const RunConfig& config, const LoadedState& st, ArtifactSet& files) {
  const double p = require(config.p, "p");
  const Observable1 g = Observable1::parse(config.observable);
  const Density2 rho = density_of(st.psi);
  const Density1 m = marginal_total(rho);
  const PredictionResult res = conditional_expectation(rho, m, g, p);
  const ConditionalDensity cd = conditional_density(rho, m, p);
  const double p1 = predict_p1(rho, m, p).value;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < cd.val.size(); ++i) rows.push_back({cd.grid.node(i), cd.val[i]});
  files.add("conditional.csv", csv_table({"p1", "value"}, rows));
  return {{"value", res.value},
          {"conditioning_p", res.conditioning_p},
          {"method", to_string(res.method)},
          {"observable", g.to_string()},
          {"predict_p1", p1},
          {"predict_p2", p - p1}};
}

json cmd_measure(const RunConfig& config, const LoadedState& st, ArtifactSet& files) {
  const double p = require(config.p, "p");
  const double eps = require(config.eps, "eps");
  const Observable1 f = Observable1::parse(config.observable);
  const Observable1 g = Observable1::parse(config.total_observable);
  const PostMeasurementState post = apply_window(st.psi, {p, eps});
  const Density1 m = marginal_total(density_of(st.psi));
  files.add("post_amp.csv", amplitude_csv(post.psi));
  const json& d = st.descriptor;
  json post_state = {{"kind", "grid"},
                     {"grid1", d.contains("grid1") ? d["grid1"] : d["grid"]},
                     {"grid2", d.contains("grid2") ? d["grid2"] : d["grid"]},
                     {"amp_file", "post_amp.csv"}};
  files.add("post_state.json", dump(post_state));
  return {{"requested_window", window_json({p, eps})},
          {"window", window_json(post.window)},
          {"norm_prob", post.norm_prob},
          {"window_probability", window_probability(m, post.window)},
          {"idempotent", projection_idempotence_check(st.psi, {p, eps})},
          {"post_expectation_p1", {{"observable", f.to_string()}, {"value", post_expectation_p1(post, f)}}},
          {"post_expectation_total", {{"observable", config.total_observable}, {"value", post_expectation_total(post, g)}}}};
}

json cmd_converge(const RunConfig& config, const LoadedState& st, ArtifactSet& files) {
  const double p = require(config.p, "p");
  const Observable1 f = Observable1::parse(config.observable);
  const ConvergenceReport r = epsilon_limit_study(st.psi, p, f, config.eps_start, config.halvings);
  files.add("converge.csv", convergence_csv(r));
  json out = convergence_json(r);
  out.erase("ladder");
  return out;
}

json cmd_gaussian(const RunConfig& config, const LoadedState& st, ArtifactSet&) {
  if (!st.gaussian) throw Error(ErrorKind::invalid_config, "the gaussian command needs a gaussian state file");
  const GaussianParams& gp = *st.gaussian;
  std::vector<double> ps = config.p_list;
  if (config.p) ps.push_back(*config.p);
  if (ps.empty()) ps.push_back(gp.mu());
  json predictors = json::array();
  for (double p : ps) {
    const double a = linear_predictor_p1(gp, p);
    const double b = linear_predictor_p2(gp, p);
    predictors.push_back({{"p", p}, {"p1", a}, {"p2", b}, {"sum_equals_p", a + b == p}});
  }
  const CovarianceMatrix s = sigma_matrix(gp);
  const Matrix2 inv = sigma_inverse(gp);
  const TotalMoments tm = total_moments(gp);
  return {{"sigma", {{"s11", s.s11}, {"s12", s.s12}, {"s22", s.s22}}},
          {"sigma_inverse", {{inv[0][0], inv[0][1]}, {inv[1][0], inv[1][1]}}},
          {"sigma_inverse_residual", sigma_inverse_check(gp)},
          {"positive_definite", s.positive_definite()},
          {"predictors", predictors},
          {"conditional_variance_p1", conditional_variance_p1(gp)},
          {"total_moments", {{"mean", tm.mean}, {"variance", tm.variance}}}};
}

json cmd_uncertainty(const RunConfig& config, const LoadedState& st, ArtifactSet&) {
  json out = report_json(uncertainty_report(st.psi, config.m1, config.m2));
  if (!config.eps_list.empty()) {
    const double p = require(config.p, "p");
    out["ladder"] = ladder_json(cm_variance_vs_epsilon(st.psi, p, config.eps_list, config.m1, config.m2));
  }
  return out;
}

json cmd_sample(const RunConfig& config, const LoadedState& st, ArtifactSet& files) {
  if (config.n < 1) throw Error(ErrorKind::invalid_config, "--n must be at least 1");
  const Observable1 g = Observable1::parse(config.observable);
  const SampleSet s = st.gaussian ? sample(*st.gaussian, config.n, config.seed)
                                  : sample(density_of(st.psi), config.n, config.seed);
  json out = {{"n", s.n()}, {"seed", s.seed}, {"source_hash", s.source_hash}, {"observable", g.to_string()}};
  std::vector<std::vector<double>> rows;
  if (config.window) {
    const MeasurementWindow w = parse_window(*config.window);
    const EmpiricalEstimate est = empirical_conditional(s, w, g);
    for (const auto& pt : s.points) {
      const double total = pt[0] + pt[1];
      if (total > w.lower() && total < w.upper()) rows.push_back({pt[0], pt[1]});
    }
    out["window"] = window_json(w);
    out["mean"] = est.mean;
    out["std_error"] = est.std_error;
    out["n_accepted"] = est.n_accepted;
  } else {
    double sum = 0.0;
    for (const auto& pt : s.points) sum += g(pt[0]);
    const double mean = sum / static_cast<double>(s.n());
    double ss = 0.0;
    for (const auto& pt : s.points) ss += (g(pt[0]) - mean) * (g(pt[0]) - mean);
    out["mean"] = mean;
    out["std_error"] = s.n() > 1 ? json(std::sqrt(ss / static_cast<double>(s.n() - 1) / static_cast<double>(s.n())))
                                 : json(nullptr);
    out["n_accepted"] = s.n();
    for (const auto& pt : s.points) rows.push_back({pt[0], pt[1]});
  }
  if (s.n() >= 2 && config.bins >= 10) {
    const EmpiricalTotalDensity h = empirical_total_density(s, config.bins);
    out["total_momentum"] = {{"mean", h.mean}, {"variance", h.variance}, {"variance_std_error", h.variance_std_error}};
  }
  files.add("samples.csv", csv_table({"p1", "p2"}, rows));
  return out;
}

json cmd_report(const RunConfig& config, const LoadedState& st, ArtifactSet& files) {
  if (!st.gaussian) throw Error(ErrorKind::invalid_config, "the report command needs a gaussian state");
  json rep = epr_walkthrough(*st.gaussian, st.psi, WalkthroughOptions{config.p, config.m1, config.m2});
  std::ostringstream md;
  md << "# Total-momentum prediction report\n\n";
  md << "| section | pass |\n|---|---|\n";
  for (const char* key : {"total_momentum", "predictor_line", "convergence", "uncertainty"}) {
    md << "| " << key << " | " << (rep[key]["pass"].get<bool>() ? "yes" : "no") << " |\n";
  }
  md << "\nAll sections pass: " << (rep["all_pass"].get<bool>() ? "yes" : "no") << "\n";
  files.add("report.md", md.str());
  return rep;
}

}  // namespace

Command parse_command(const std::string& name) {
  for (const auto& entry : kCommands)
    if (name == entry.name) return entry.command;
  throw Error(ErrorKind::invalid_config, "unknown command '" + name + "'");
}

const char* to_string(Command command) noexcept {
  for (const auto& entry : kCommands)
    if (entry.command == command) return entry.name;
  return "unknown";
}

json config_json(const RunConfig& c) {
  json j = {{"command", to_string(c.command)},
            {"eps_start", c.eps_start},
            {"halvings", c.halvings},
            {"eps_list", c.eps_list},
            {"p_list", c.p_list},
            {"observable", c.observable},
            {"total_observable", c.total_observable},
            {"m1", c.m1},
            {"m2", c.m2},
            {"n", c.n},
            {"seed", c.seed},
            {"bins", c.bins}};
  j["state_path"] = c.state_path ? json(*c.state_path) : json(nullptr);
  j["p"] = c.p ? json(*c.p) : json(nullptr);
  j["eps"] = c.eps ? json(*c.eps) : json(nullptr);
  j["window"] = c.window ? json(*c.window) : json(nullptr);
  return j;
}

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::negligible_event:
    case ErrorKind::zero_probability_window:
    case ErrorKind::window_resolution_exceeded:
    case ErrorKind::too_few_accepted:
      return 3;
    case ErrorKind::io_error:
      return 4;
    default:
      return 2;
  }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const LoadedState st = load_for(config);
    ArtifactSet files;
    json summary;
    switch (config.command) {
      case Command::marginal: summary = cmd_marginal(config, st, files); break;
      case Command::condexp: summary = cmd_condexp(config, st, files); break;
      case Command::measure: summary = cmd_measure(config, st, files); break;
      case Command::converge: summary = cmd_converge(config, st, files); break;
      case Command::gaussian: summary = cmd_gaussian(config, st, files); break;
      case Command::uncertainty: summary = cmd_uncertainty(config, st, files); break;
      case Command::sample: summary = cmd_sample(config, st, files); break;
      case Command::report: summary = cmd_report(config, st, files); break;
    }
    json cfg = config_json(config);
    cfg["state"] = st.descriptor;
    summary["config"] = cfg;
    const std::string text = dump(summary);
    if (config.out_dir) {
      files.add(std::string(to_string(config.command)) + ".json", text);
      files.commit(*config.out_dir);
    }
    out << text;
    return 0;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    err << json{{"error", to_string(e.kind())}, {"exit", code}, {"message", e.what()}}.dump() << "\n";
    return code;
  }
}

// ---- walkthrough -------------------------------------------------------------------

json default_state_json() {
  return {{"kind", "gaussian"},
          {"mu1", 0.0},
          {"mu2", 0.0},
          {"sigma", 1.0},
          {"c", -0.99},
          {"grid", {{"min", -6.0}, {"max", 6.0}, {"n", 2720}}}};
}

json epr_walkthrough(const GaussianParams& params, const WaveFunction2& psi, const WalkthroughOptions& options) {
  const TotalMoments tm = total_moments(params);
  const double sd_total = std::sqrt(tm.variance);
  const Density2 rho = density_of(psi);
  const Density1 marg = marginal_total(rho);
  json rep;

  // Total-momentum distribution.
  {
    const double mass = total_mass(marg);
    double first = 0.0, second = 0.0;
    for (std::size_t k = 0; k < marg.grid.size(); ++k) {
      const double p = marg.grid.node(k);
      first += marg.grid.weight(k) * p * marg.val[k];
      second += marg.grid.weight(k) * p * p * marg.val[k];
    }
    const double var = second - first * first;
    const bool pass = std::abs(mass - 1.0) <= kMassTol && std::abs(first - tm.mean) <= kMomentRelTol * std::max(1.0, std::abs(tm.mean)) &&
                      std::abs(var - tm.variance) <= kMomentRelTol * tm.variance;
    rep["total_momentum"] = {{"mass", mass},        {"mean", first},           {"expected_mean", tm.mean},
                             {"variance", var},     {"expected_variance", tm.variance}, {"pass", pass}};
  }

  // Predictor line: quadrature prediction against mu1 + (p - mu) / 2 on nine points.
  {
    json rows = json::array();
    double worst = 0.0;
    bool identity_holds = true;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int k = -4; k <= 4; ++k) {
      const double p = tm.mean + sd_total * static_cast<double>(k);
      const double q1 = predict_p1(rho, marg, p).value;
      const double q2 = predict_p2(rho, marg, p).value;
      const double lin = linear_predictor_p1(params, p);
      worst = std::max(worst, std::abs(q1 - lin));
      identity_holds = identity_holds && (q1 + q2 == p);
      sx += p;
      sy += q1;
      sxx += p * p;
      sxy += p * q1;
      rows.push_back({{"p", p}, {"predict_p1", q1}, {"predict_p2", q2}, {"linear_p1", lin}});
    }
    const double slope = (9.0 * sxy - sx * sy) / (9.0 * sxx - sx * sx);
    rep["predictor_line"] = {{"points", rows},
                             {"max_abs_error", worst},
                             {"slope", slope},
                             {"predictor_identity_exact", identity_holds},
                             {"pass", worst <= kPredictorTol && identity_holds}};
  }

  const double p_cond = options.p.value_or(tm.mean + 0.5 * sd_total);
  const double eps_start = std::min(1.0, sd_total);
  const double cell = sum_grid(psi.grid1, psi.grid2).spacing();
  const int max_halvings = static_cast<int>(std::floor(std::log2(eps_start / (kMinWindowCells * cell)) + 1e-9));
  const int halvings = std::min(6, max_halvings);
  if (halvings < 3) {
    std::ostringstream os;
    os << "grid spacing " << cell << " is too coarse for a three-halving ladder from eps = " << eps_start
       << "; refine the grid";
    throw Error(ErrorKind::window_resolution_exceeded, os.str());
  }

  // Window-to-conditional convergence for p1 and for the total momentum itself.
  {
    const ConvergenceReport r1 = epsilon_limit_study(psi, p_cond, Observable1::identity(), eps_start, halvings);
    const ConvergenceReport r2 = total_limit_study(psi, p_cond, Observable1::identity(), eps_start, halvings);
    rep["convergence"] = {{"p", p_cond},
                          {"eps_start", eps_start},
                          {"halvings", halvings},
                          {"p1_given_total", convergence_json(r1)},
                          {"total_given_total", convergence_json(r2)},
                          {"pass", convergence_passes(r1) && convergence_passes(r2)}};
  }

  // Uncertainty products and the centre-of-mass ladder.
  {
    const UncertaintyReport base = uncertainty_report(psi, options.m1, options.m2);
    std::vector<double> ladder_eps;
    for (int k = 0; k < 4; ++k) ladder_eps.push_back(std::ldexp(eps_start, -k));
    const CmLadder ladder = cm_variance_vs_epsilon(psi, p_cond, ladder_eps, options.m1, options.m2);
    json base_json = report_json(base);
    json ladder_out = ladder_json(ladder);
    const bool base_pass = base_json["pass"]["x1_p1"].get<bool>() && base_json["pass"]["x2_p2"].get<bool>() &&
                           base_json["pass"]["xcm_ptotal"].get<bool>();
    rep["uncertainty"] = {{"unmeasured", base_json},
                          {"ladder", ladder_out},
                          {"pass", base_pass && ladder_out["pass"].get<bool>()}};
  }

  rep["all_pass"] = rep["total_momentum"]["pass"].get<bool>() && rep["predictor_line"]["pass"].get<bool>() &&
                    rep["convergence"]["pass"].get<bool>() && rep["uncertainty"]["pass"].get<bool>();
  return rep;
}

}  // namespace qpredict
