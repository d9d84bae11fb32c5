#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qirka {

enum class ErrorCode {
  invalid_dimension,
  contract_violation,
  near_pole,
  insufficient_pool,
  degenerate_pairing,
  non_symplectic_basis,
  shift_collision,
  numerical_breakdown,
  instability,
  config_error,
  parse_error,
  io_error,
};

/// Machine-readable name used in CSV output and CLI messages.
inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid_dimension";
    case ErrorCode::contract_violation: return "contract_violation";
    case ErrorCode::near_pole: return "near_pole";
    case ErrorCode::insufficient_pool: return "insufficient_pool";
    case ErrorCode::degenerate_pairing: return "degenerate_pairing";
    case ErrorCode::non_symplectic_basis: return "non_symplectic_basis";
    case ErrorCode::shift_collision: return "shift_collision";
    case ErrorCode::numerical_breakdown: return "numerical_breakdown";
    case ErrorCode::instability: return "instability";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

/// Single exception type for the library. The numeric payload carries the
/// quantity that triggered the failure where one exists: columns achieved for
/// insufficient_pool, smallest alpha for degenerate_pairing, the offending
/// margin for instability, the line number for parse_error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, double value = 0.0)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  double value_;
};

}  // namespace qirka
