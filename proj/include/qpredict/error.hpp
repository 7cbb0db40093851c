#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpredict {

/// Failure categories raised by the numerical modules and the CLI.
enum class ErrorKind {
  invalid_range,
  invalid_count,
  invalid_argument,
  coverage_too_small,
  window_out_of_range,
  out_of_range,
  negligible_event,
  zero_probability_window,
  window_resolution_exceeded,
  too_few_accepted,
  odd_grid,
  parse_error,
  invalid_config,
  io_error,
};

/// Stable kebab-case identifier used in machine-readable diagnostics.
std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qpredict
