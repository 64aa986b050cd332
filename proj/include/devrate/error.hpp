#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace devrate {

/// Failure classes raised by the library. The CLI maps each class to an exit code.
enum class ErrorKind {
  derivative_unavailable,
  invalid_nonequilibrium_force,
  invalid_lyapunov,
  insufficient_window,
  out_of_theory,
  parameter,
  unsupported_diffusion,
  mesh,
  measure,
  convergence,
  positivity_violation,
  blow_up,
  numeric_range,
  degeneracy,
  domain,
  empty_family,
  incompatible_rhs,
  solver,
  expression,
  config,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::derivative_unavailable: return "derivative-unavailable";
    case ErrorKind::invalid_nonequilibrium_force: return "invalid-nonequilibrium-force";
    case ErrorKind::invalid_lyapunov: return "invalid-lyapunov";
    case ErrorKind::insufficient_window: return "insufficient-window";
    case ErrorKind::out_of_theory: return "out-of-theory";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::unsupported_diffusion: return "unsupported-diffusion";
    case ErrorKind::mesh: return "mesh";
    case ErrorKind::measure: return "measure";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::positivity_violation: return "positivity-violation";
    case ErrorKind::blow_up: return "blow-up";
    case ErrorKind::numeric_range: return "numeric-range";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::domain: return "domain";
    case ErrorKind::empty_family: return "empty-family";
    case ErrorKind::incompatible_rhs: return "incompatible-rhs";
    case ErrorKind::solver: return "solver";
    case ErrorKind::expression: return "expression";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace devrate
