#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hibler/grid.hpp"
#include "hibler/operators.hpp"

namespace hibler {

/// n_t snapshots of stacked dofs at t_k = k T / n_t. Indexing is cyclic; there
/// is no separate snapshot at t = T. Without a grid the dofs are abstract and
/// all spatial norms fall back to plain l^q.
struct PeriodicTrajectory {
  double T = 1.0;
  GridPtr grid;
  std::vector<Eigen::VectorXd> snapshots;

  int n_t() const { return static_cast<int>(snapshots.size()); }
  Eigen::Index dofs() const { return snapshots.empty() ? 0 : snapshots.front().size(); }
  double time(long k) const { return T * static_cast<double>(k) / n_t(); }
  const Eigen::VectorXd& at(long k) const;
  State state(long k) const;

  // n_t even and >= 4, equal snapshot sizes matching the grid layout.
  void validate() const;

  static PeriodicTrajectory constant(const Eigen::VectorXd& v, int n_t, double T, GridPtr grid = {});
  static PeriodicTrajectory zeros(Eigen::Index dofs, int n_t, double T, GridPtr grid = {});
  static PeriodicTrajectory from_function(int n_t, double T, GridPtr grid,
                                          const std::function<Eigen::VectorXd(double)>& f);
};

PeriodicTrajectory operator+(const PeriodicTrajectory& a, const PeriodicTrajectory& b);
PeriodicTrajectory operator-(const PeriodicTrajectory& a, const PeriodicTrajectory& b);
PeriodicTrajectory operator*(double s, const PeriodicTrajectory& a);

/// Exact derivative of the trigonometric interpolant; the Nyquist mode is dropped.
PeriodicTrajectory spectral_derivative(const PeriodicTrajectory& w);

/// X0: component L^q norms combined in l^q. X1: same with W^{2,q}.
double x0_norm(const Eigen::VectorXd& v, const GridPtr& grid, double q);
double x1_norm(const Eigen::VectorXd& v, const GridPtr& grid, double q);

enum class TrajectoryNorm { F_norm, E_norm };

/// F = (sum_k dt |v_k|_X0^p)^(1/p); E = F(v') + (sum_k dt |v_k|_X1^p)^(1/p).
double trajectory_norm(const PeriodicTrajectory& traj, TrajectoryNorm which, double p = 5.0,
                       double q = 5.0);

/// Sup over snapshots of the order-1 spatial norm, a monitored stand-in for the trace space.
double trace_proxy_norm(const PeriodicTrajectory& traj, double q = 5.0);

/// Mode-wise solver for w' + A w = g, w(0) = w(T). One complex sparse LU per
/// mode k = 0..n_t/2 - 1, built once and reused; the Nyquist mode solves A w = g.
class PeriodicSolver {
 public:
  PeriodicSolver(const SparseMatrix& A, double T, int n_t, double rel_threshold = 1e-10);
  ~PeriodicSolver();
  PeriodicSolver(PeriodicSolver&&) noexcept;
  PeriodicSolver& operator=(PeriodicSolver&&) noexcept;

  PeriodicTrajectory solve(const PeriodicTrajectory& g) const;
  const MonodromyReport& report() const;
  const SparseMatrix& matrix() const;
  double period() const;
  int n_t() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

PeriodicTrajectory solve_periodic_linear(const DiscreteOperator& A, const PeriodicTrajectory& g,
                                         double T);

/// F-norm of w' + A w - g at the collocation points (spectral derivative).
double periodic_residual(const SparseMatrix& A, const PeriodicTrajectory& w,
                         const PeriodicTrajectory& g, double p = 5.0, double q = 5.0);

/// max over n_probes random g (unit F-norm) of |w|_E / |g|_F. Probe i depends
/// only on (seed, i), so the estimate is non-decreasing in n_probes.
double estimate_maxreg_constant(const DiscreteOperator& A, double T, int n_probes, int n_t = 32,
                                std::uint64_t seed = 42, double p = 5.0, double q = 5.0);

}  // namespace hibler
