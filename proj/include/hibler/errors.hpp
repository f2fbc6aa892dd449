#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hibler {

enum class ErrorKind {
  dimension_too_small,
  invalid_exponent,
  invalid_argument,
  shape_mismatch,
  inadmissible_state,
  degenerate_compactness,
  resonance,
  factorization_failure,
  invalid_probe_count,
  degenerate_pair,
  empty_feasible_set,
  no_convergence,
  left_ball,
  blow_up,
  no_progress,
  assumption_failure,
  config,
  io,
};

std::string_view to_string(ErrorKind kind);

// Solver failures map to exit code 1, configuration problems to 2.
bool is_solver_failure(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when (i*omega_k + A) is numerically singular for some temporal mode.
class ResonanceError : public Error {
 public:
  ResonanceError(std::vector<int> modes, const std::string& what)
      : Error(ErrorKind::resonance, what), modes_(std::move(modes)) {}

  const std::vector<int>& modes() const noexcept { return modes_; }

 private:
  std::vector<int> modes_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace hibler
