#include "qpredict/error.hpp"

namespace qpredict {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_range: return "invalid-range";
    case ErrorKind::invalid_count: return "invalid-count";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::coverage_too_small: return "coverage-too-small";
    case ErrorKind::window_out_of_range: return "window-out-of-range";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::negligible_event: return "negligible-event";
    case ErrorKind::zero_probability_window: return "zero-probability-window";
    case ErrorKind::window_resolution_exceeded: return "window-resolution-exceeded";
    case ErrorKind::too_few_accepted: return "too-few-accepted";
    case ErrorKind::odd_grid: return "odd-grid";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace qpredict
