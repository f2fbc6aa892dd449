#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hibler/operators.hpp"
#include "hibler/periodic_linear.hpp"
#include "hibler/thermoforcing.hpp"

namespace hibler {

enum class Scheme { imex_euler, imex_cn };

struct IvpConfig {
  double dt = 1.0 / 256.0;
  Scheme scheme = Scheme::imex_cn;
  RhsVariant variant = RhsVariant::F_p;
  double blowup_threshold = 1e6;

  void validate() const;
};

/// v' + A(v) v = F(t, v) after spatial discretization.
class SemiDiscreteSystem {
 public:
  virtual ~SemiDiscreteSystem() = default;
  virtual Eigen::Index size() const = 0;
  virtual SparseMatrix op(const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd rhs(double t, const Eigen::VectorXd& v) const = 0;
  virtual void check(const Eigen::VectorXd& v) const = 0;
  virtual double norm(const Eigen::VectorXd& v) const = 0;
  virtual GridPtr grid() const { return {}; }
};

/// Constant operator with explicit forcing g(t).
class LinearSystem final : public SemiDiscreteSystem {
 public:
  LinearSystem(SparseMatrix A, std::function<Eigen::VectorXd(double)> g, GridPtr grid = {});
  Eigen::Index size() const override { return A_.rows(); }
  SparseMatrix op(const Eigen::VectorXd&) const override { return A_; }
  Eigen::VectorXd rhs(double t, const Eigen::VectorXd& v) const override;
  void check(const Eigen::VectorXd&) const override {}
  double norm(const Eigen::VectorXd& v) const override;
  GridPtr grid() const override { return grid_; }

 private:
  SparseMatrix A_;
  std::function<Eigen::VectorXd(double)> g_;
  GridPtr grid_;
};

/// The full sea-ice system with A(v) implicit (eps = 0 unless an eps variant
/// is selected) and the chosen right-hand side explicit.
class HiblerSystem final : public SemiDiscreteSystem {
 public:
  HiblerSystem(GridPtr grid, PhysParams pp, ForcingSpec fs, RhsVariant variant);
  Eigen::Index size() const override;
  SparseMatrix op(const Eigen::VectorXd& v) const override;
  Eigen::VectorXd rhs(double t, const Eigen::VectorXd& v) const override;
  void check(const Eigen::VectorXd& v) const override;
  double norm(const Eigen::VectorXd& v) const override;
  GridPtr grid() const override { return grid_; }

 private:
  GridPtr grid_;
  PhysParams pp_;
  ForcingSpec fs_;
  RhsVariant variant_;
  double eps_ = 0.0;
};

struct TimeSeries {
  GridPtr grid;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> v;
};

struct IvpResult {
  TimeSeries trajectory;
  Eigen::VectorXd final_state;
  double dt_used = 0.0;
  int n_steps = 0;
  bool dt_adjusted = false;
};

/// Integrates one period. dt is shrunk so that n_steps dt = T exactly and
/// n_steps is a multiple of `align` (collocation snapshots land on steps).
IvpResult integrate_period(const SemiDiscreteSystem& sys, const Eigen::VectorXd& v0, double T,
                           const IvpConfig& cfg, int align = 1, bool keep_trajectory = true);

IvpResult integrate_period(const State& v0, double T, const IvpConfig& cfg, const PhysParams& pp,
                           const ForcingSpec& fs, int align = 1);

struct ShootingConfig {
  double theta = 1.0;
  double tol = 1e-8;  // on |P(v0) - v0| in X0
  int max_iter = 200;
};

struct ShootingResult {
  Eigen::VectorXd v0;
  double residual = 0.0;
  int iterations = 0;
  double theta_final = 1.0;
  std::vector<double> residual_history;
};

/// Damped Picard iteration on the period map; theta halves whenever the
/// residual grows.
ShootingResult shooting_fixed_point(const SemiDiscreteSystem& sys, const Eigen::VectorXd& guess,
                                    double T, const IvpConfig& cfg, const ShootingConfig& scfg = {});

ShootingResult shooting_fixed_point(const State& guess, double T, const IvpConfig& cfg,
                                    const PhysParams& pp, const ForcingSpec& fs,
                                    const ShootingConfig& scfg = {});

/// Linear interpolation of a time series at t_k = k T / n_t.
PeriodicTrajectory resample(const TimeSeries& ts, double T, int n_t);

struct CrossValidation {
  double abs_F = 0.0;        // |spectral - shooting|_F
  double rel_F = 0.0;        // abs_F / |spectral|_F
  double rel_F_deviation = 0.0;  // abs_F / |spectral - reference|_F (0 without reference)
  double sup_u1 = 0.0;
  double sup_u2 = 0.0;
  double sup_h = 0.0;
  double sup_a = 0.0;
};

CrossValidation cross_validate(const PeriodicTrajectory& spectral, const TimeSeries& shooting,
                               double p = 5.0, double q = 5.0,
                               const std::optional<PeriodicTrajectory>& reference = std::nullopt);

}  // namespace hibler
