#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kafcm {

enum class ErrorKind {
  invalid_domain,
  zero_grid,
  index_out_of_range,
  degree_zero,
  dimension_mismatch,
  non_finite_state,
  shape_mismatch,
  empty_input,
  non_finite_gradient,
  divergence,
  invalid_config,
  series_too_short,
  invalid_fractions,
  instability,
  masked_edge,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. `kind()` identifies the failure class so callers
/// (the CLI in particular) can map it onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_domain: return "invalid-domain";
    case ErrorKind::zero_grid: return "zero-grid";
    case ErrorKind::index_out_of_range: return "index-out-of-range";
    case ErrorKind::degree_zero: return "degree-zero";
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::non_finite_state: return "non-finite-state";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::non_finite_gradient: return "non-finite-gradient";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::series_too_short: return "series-too-short";
    case ErrorKind::invalid_fractions: return "invalid-fractions";
    case ErrorKind::instability: return "instability";
    case ErrorKind::masked_edge: return "masked-edge";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace kafcm
