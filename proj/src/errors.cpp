#include "hibler/errors.hpp"

namespace hibler {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_too_small: return "dimension_too_small";
    case ErrorKind::invalid_exponent: return "invalid_exponent";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::shape_mismatch: return "shape_mismatch";
    case ErrorKind::inadmissible_state: return "inadmissible_state";
    case ErrorKind::degenerate_compactness: return "degenerate_compactness";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::factorization_failure: return "factorization_failure";
    case ErrorKind::invalid_probe_count: return "invalid_probe_count";
    case ErrorKind::degenerate_pair: return "degenerate_pair";
    case ErrorKind::empty_feasible_set: return "empty_feasible_set";
    case ErrorKind::no_convergence: return "no_convergence";
    case ErrorKind::left_ball: return "left_ball";
    case ErrorKind::blow_up: return "blow_up";
    case ErrorKind::no_progress: return "no_progress";
    case ErrorKind::assumption_failure: return "assumption_failure";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

bool is_solver_failure(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::resonance:
    case ErrorKind::factorization_failure:
    case ErrorKind::no_convergence:
    case ErrorKind::left_ball:
    case ErrorKind::blow_up:
    case ErrorKind::no_progress:
    case ErrorKind::inadmissible_state:
    case ErrorKind::degenerate_compactness:
      return true;
    default:
      return false;
  }
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hibler
