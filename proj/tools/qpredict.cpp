#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpredict/cli.hpp"

namespace {

using qpredict::Command;
using qpredict::RunConfig;

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--state", cfg.state_path, "state file (JSON)");
  sub->add_option("--out", cfg.out_dir, "directory for CSV/JSON artifacts");
}

void add_observable(CLI::App* sub, RunConfig& cfg, const char* help) {
  sub->add_option("--observable", cfg.observable, help)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional momentum prediction for two-particle states"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* marginal = app.add_subcommand("marginal", "density of the total momentum p1 + p2");
  add_common(marginal, cfg);

  auto* condexp = app.add_subcommand("condexp", "conditional expectation of g(p1) given p1 + p2 = p");
  add_common(condexp, cfg);
  condexp->add_option("--p", cfg.p, "conditioning total momentum")->required();
  add_observable(condexp, cfg, "g: p1, p1^2, poly:c0,c1,..., ind:a,b");

  auto* measure = app.add_subcommand("measure", "apply a total-momentum window to the state");
  add_common(measure, cfg);
  measure->add_option("--p", cfg.p, "window center")->required();
  measure->add_option("--eps", cfg.eps, "window half-width")->required();
  add_observable(measure, cfg, "F, a function of p1");
  measure->add_option("--total-observable", cfg.total_observable, "G, a function of p1 + p2")->capture_default_str();

  auto* converge = app.add_subcommand("converge", "window-halving study towards the conditional expectation");
  add_common(converge, cfg);
  converge->add_option("--p", cfg.p, "conditioning total momentum")->required();
  converge->add_option("--eps-start", cfg.eps_start, "largest half-width")->capture_default_str();
  converge->add_option("--halvings", cfg.halvings, "number of halvings")->capture_default_str();
  add_observable(converge, cfg, "F, a function of p1");

  auto* gaussian = app.add_subcommand("gaussian", "closed-form covariance and linear predictors");
  add_common(gaussian, cfg);
  gaussian->add_option("--p", cfg.p, "total momentum for the predictors");
  gaussian->add_option("--p-list", cfg.p_list, "further total momenta")->delimiter(',');

  auto* uncertainty = app.add_subcommand("uncertainty", "position/momentum uncertainty products");
  add_common(uncertainty, cfg);
  uncertainty->add_option("--m1", cfg.m1, "mass of particle 1")->capture_default_str();
  uncertainty->add_option("--m2", cfg.m2, "mass of particle 2")->capture_default_str();
  uncertainty->add_option("--p", cfg.p, "window center for the ladder");
  uncertainty->add_option("--eps-list", cfg.eps_list, "window half-widths for the ladder")->delimiter(',');

  auto* sample = app.add_subcommand("sample", "Monte Carlo draws from |psi|^2");
  add_common(sample, cfg);
  sample->add_option("--n", cfg.n, "sample count")->capture_default_str();
  sample->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  sample->add_option("--window", cfg.window, "post-select a < p1 + p2 < b, written a:b");
  sample->add_option("--bins", cfg.bins, "histogram bins for the total momentum")->capture_default_str();
  add_observable(sample, cfg, "g, a function of p1");

  auto* report = app.add_subcommand("report", "end-to-end walkthrough of a Gaussian state");
  add_common(report, cfg);
  report->add_option("--p", cfg.p, "conditioning total momentum");
  report->add_option("--m1", cfg.m1, "mass of particle 1")->capture_default_str();
  report->add_option("--m2", cfg.m2, "mass of particle 2")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", "parse-error"}, {"exit", 2}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  for (auto* sub : app.get_subcommands()) cfg.command = qpredict::parse_command(sub->get_name());
  return qpredict::run(cfg, std::cout, std::cerr);
}
