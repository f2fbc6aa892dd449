#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hibler/operators.hpp"
#include "hibler/periodic_linear.hpp"
#include "hibler/thermoforcing.hpp"

namespace hibler {

struct FixpointConfig {
  double R = 0.01;             // ball radius in the E-norm
  double delta_small = 2.5e-3; // smallness level of data and sources
  double eps_shift = 1.0;
  double c_s = 1.0;
  double c_f = 2.0;
  double tol = 1e-9;
  int max_iter = 50;
  int n_t = 32;
  double p = 5.0;
  double q = 5.0;
  bool time_dependent_f = false;
  bool force = false;  // run even if the assumption report fails

  void validate() const;
};

struct AssumptionCheck {
  std::string name;
  std::string relation;  // human-readable inequality
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;

  bool all_pass() const;
  const AssumptionCheck& get(const std::string& name) const;
};

/// Evaluates P1-P3 (PT1-PT2 when time_dependent_f) and the forcing smallness
/// condition with discrete norms. Never throws on a failed inequality.
AssumptionReport check_assumptions(const State& v_star, const PhysParams& pp, const ForcingSpec& fs,
                                   const FixpointConfig& cfg, bool time_dependent_f);

/// Frozen periodic problem around v*: holds A_eps(v*) and its mode factorizations.
class FixpointProblem {
 public:
  FixpointProblem(const State& v_star, const PhysParams& pp, const ForcingSpec& fs,
                  const FixpointConfig& cfg);

  /// w' + A_eps(v*) w = F(t, v) + (A_eps(v*) - A_eps(v(t))) v(t), w(0) = w(T).
  PeriodicTrajectory phi(const PeriodicTrajectory& v) const;

  /// F_{eps,p} (or F_{eps,p,t}) evaluated along v.
  PeriodicTrajectory rhs(const PeriodicTrajectory& v) const;

  /// |v' + A_eps(v) v - F_eps(v)|_F and |v' + A(v) v - F_p(v)|_F.
  std::pair<double, double> residuals(const PeriodicTrajectory& v) const;

  PeriodicTrajectory star() const;
  double e_norm(const PeriodicTrajectory& v) const;
  double f_norm(const PeriodicTrajectory& v) const;
  void require_admissible(const PeriodicTrajectory& v, const std::string& where) const;

  /// v* plus a smooth random perturbation with E-norm exactly `radius`
  /// (velocity vanishes on the boundary, scalars satisfy the Neumann condition).
  PeriodicTrajectory random_ball_point(double radius, std::uint64_t seed) const;

  const State& v_star() const { return v_star_; }
  const PhysParams& physics() const { return pp_; }
  const ForcingSpec& forcing() const { return fs_; }
  const FixpointConfig& config() const { return cfg_; }
  const SparseMatrix& A_star() const { return A_star_.matrix; }
  const PeriodicSolver& solver() const { return *solver_; }
  RhsVariant variant() const { return variant_; }

 private:
  State v_star_;
  PhysParams pp_;  // eps_shift taken from the fixed-point configuration
  ForcingSpec fs_;
  FixpointConfig cfg_;
  RhsVariant variant_;
  DiscreteOperator A_star_;
  std::shared_ptr<const PeriodicSolver> solver_;
};

PeriodicTrajectory phi_map(const PeriodicTrajectory& v, const State& v_star, const PhysParams& pp,
                           const ForcingSpec& fs, const FixpointConfig& cfg);

struct IterationRecord {
  int iter = 0;
  double increment = 0.0;  // |v^{n} - v^{n-1}|_E
  double ratio = 0.0;      // increment / previous increment (0 for the first)
  double ball_distance = 0.0;
  double min_h = 0.0;
  double min_a = 0.0;
};

struct ConvergenceLog {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  double contraction_factor = 0.0;  // running max of ratios from the second step on
  double residual_eps = 0.0;
  double residual_original = 0.0;
  double trace_proxy = 0.0;
  std::vector<std::string> warnings;
};

struct FixpointResult {
  PeriodicTrajectory trajectory;
  ConvergenceLog log;
};

/// Picard iteration v^{n+1} = Phi(v^n) from v^0 (default v*). Leaving the
/// R-ball is a hard error; so is hitting max_iter.
FixpointResult solve_periodic_quasilinear(const FixpointProblem& problem,
                                          std::optional<PeriodicTrajectory> initial = std::nullopt);
FixpointResult solve_periodic_quasilinear(const FixpointConfig& cfg, const PhysParams& pp,
                                          const ForcingSpec& fs, const State& v_star);

/// |Phi(v1) - Phi(v2)|_E / |v1 - v2|_E; degenerate-pair error if v1 == v2.
double contraction_ratio(const FixpointProblem& problem, const PeriodicTrajectory& v1,
                         const PeriodicTrajectory& v2);

/// Max contraction ratio over n_pairs random pairs in the R-ball.
double estimate_contraction(const FixpointProblem& problem, int n_pairs, std::uint64_t seed = 7);

/// Max over random pairs in the radius-R ball of |F(v1) - F(v2)|_F / |v1 - v2|_E.
double estimate_rhs_lipschitz(const FixpointProblem& problem, double R, int n_pairs,
                              std::uint64_t seed = 11);

/// Max over random pairs of |(A_eps(v1) - A_eps(v2)) w|_F / (|v1 - v2|_E |w|_E).
double estimate_operator_lipschitz(const FixpointProblem& problem, double R, int n_pairs,
                                   std::uint64_t seed = 13);

/// (R, L(R)) rows with L made non-decreasing by a running max.
std::vector<std::pair<double, double>> tabulate_L(const FixpointProblem& problem,
                                                  const std::vector<double>& radii, int n_pairs,
                                                  std::uint64_t seed = 13);

struct ParameterChoice {
  double R = 0.0;
  double delta_small = 0.0;
  double eps_bound = 0.0;
  double ck_bound = 0.0;  // 1 / (4 M C)
  bool ck_ok = false;     // C_k <= 1 / (4 M C)
};

/// R <= min(R0, 1/(4MC), 1/(8 M L(R))) with L(R) read from the table as a step
/// function on (R_{i-1}, R_i]; delta = R/(4M); eps_bound = 1/(12 M c) with
/// c = C / (1 + c_f/c_s).
ParameterChoice select_parameters(double M, double C, double C_k,
                                  const std::vector<std::pair<double, double>>& L_of_R, double R0,
                                  double cf_over_cs = 0.0);

/// C = c (1 + c_f/c_s) and C_k = (eps + c_s + (1 + 1/c_s) c_f) / (1 + c_f/c_s).
double shape_C(double c, double c_f, double c_s);
double shape_Ck(double eps, double c_f, double c_s);

}  // namespace hibler
