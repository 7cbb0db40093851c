#pragma once

// State files, numeric formatting and atomic artifact output.
//
// state.json is either
//   {"kind":"gaussian","mu1":..,"mu2":..,"sigma":..,"c":..,"grid":{"min":..,"max":..,"n":..}}
// (one grid shared by both momentum axes) or
//   {"kind":"grid","grid1":{...},"grid2":{...},"amp_file":"<path>"}
// where amp_file, resolved relative to the state file, holds CSV rows i,j,re,im.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qpredict/state.hpp"

namespace qpredict {

struct LoadedState {
  std::optional<GaussianParams> gaussian;  // set for kind "gaussian"
  WaveFunction2 psi;                       // normalized
  nlohmann::json descriptor;               // resolved state description for config echo
};

/// Throws Error(parse_error) for malformed JSON/CSV and Error(io_error) for unreadable files.
LoadedState load_state(const std::filesystem::path& path);
LoadedState parse_state(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads CSV rows `i,j,re,im` (an optional header line is skipped); missing entries are zero.
std::vector<Complex> read_amplitude_csv(const std::filesystem::path& path, std::size_t n1, std::size_t n2);

/// Writes amplitudes as `i,j,re,im` rows, skipping exact zeros.
std::string amplitude_csv(const WaveFunction2& psi);

/// Decimal with 17 significant digits.
std::string format17(double x);

/// CSV with a header row and 17-significant-digit fields.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// Collects named artifacts and publishes them together: every file is first
/// written to a temporary name in the target directory, then renamed.
class ArtifactSet {
 public:
  void add(std::string name, std::string content);
  bool empty() const noexcept { return files_.empty(); }
  /// Throws Error(io_error); on failure no temporary or partial file remains.
  void commit(const std::filesystem::path& dir) const;

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace qpredict
