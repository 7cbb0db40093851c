#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpredict/error.hpp"
#include "qpredict/state.hpp"

namespace qpredict {

enum class Command { marginal, condexp, measure, converge, gaussian, uncertainty, sample, report };

/// Throws Error(invalid_config) for unknown names.
Command parse_command(const std::string& name);
const char* to_string(Command command) noexcept;

struct RunConfig {
  Command command = Command::report;
  std::optional<std::string> state_path;  // required except for `report`
  std::optional<std::string> out_dir;     // artifacts are written only when set

  std::optional<double> p;           // conditioning / window center
  std::optional<double> eps;         // window half-width (measure)
  double eps_start = 1.0;            // converge
  int halvings = 6;                  // converge
  std::vector<double> eps_list;      // uncertainty ladder
  std::vector<double> p_list;        // gaussian predictors
  std::string observable = "p1";     // g / F, a function of p1
  std::string total_observable = "p";  // G, a function of p1 + p2
  double m1 = 1.0;
  double m2 = 1.0;
  std::size_t n = 1000000;           // sample count
  std::uint64_t seed = 42;
  std::optional<std::string> window;  // sample post-selection "a:b"
  std::size_t bins = 100;
};

nlohmann::json config_json(const RunConfig& config);

/// Exit status for the CLI: 0 success, 2 validation, 3 numerical, 4 I/O.
int exit_code_for(ErrorKind kind) noexcept;

/// Executes one command. The JSON summary goes to `out`; a single-line JSON
/// diagnostic goes to `err` on failure. Artifacts are published atomically to
/// config.out_dir only after every computation succeeded.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

struct WalkthroughOptions {
  std::optional<double> p;  // conditioning value; defaults to mu + sd_total / 2
  double m1 = 1.0;
  double m2 = 1.0;
};

/// End-to-end numerical account of a Gaussian state: total-momentum
/// distribution, predictor line, window-to-conditional convergence and the
/// uncertainty ladder, each section with its pass/fail verdict.
nlohmann::json epr_walkthrough(const GaussianParams& params, const WaveFunction2& psi,
                               const WalkthroughOptions& options);

/// Gaussian (0, 0, 1, -0.99) on [-6, 6] with 2720 points per axis, fine enough
/// for the walkthrough's window ladders.
nlohmann::json default_state_json();

}  // namespace qpredict
