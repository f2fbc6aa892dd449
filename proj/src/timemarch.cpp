#include "hibler/timemarch.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseLU>

#include "hibler/errors.hpp"

namespace hibler {

namespace {

using ColSparse = Eigen::SparseMatrix<double>;

ColSparse shifted_identity(const SparseMatrix& A, double s) {
  // I + s A
  ColSparse M = s * ColSparse(A);
  ColSparse I(A.rows(), A.cols());
  I.setIdentity();
  M += I;
  M.makeCompressed();
  return M;
}

Eigen::VectorXd implicit_solve(const ColSparse& M, const Eigen::VectorXd& b) {
  Eigen::SparseLU<ColSparse> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) fail(ErrorKind::factorization_failure, "implicit step factorization failed");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success) fail(ErrorKind::factorization_failure, "implicit step solve failed");
  return x;
}

void guard(const SemiDiscreteSystem& sys, const Eigen::VectorXd& v, double t, double limit) {
  const double n = sys.norm(v);
  if (!std::isfinite(n) || n > limit) {
    std::ostringstream msg;
    msg << "integration blew up at t = " << t << " (norm " << n << ")";
    fail(ErrorKind::blow_up, msg.str());
  }
  try {
    sys.check(v);
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << "integration left the admissible set at t = " << t << ": " << e.what();
    fail(ErrorKind::blow_up, msg.str());
  }
}

}  // namespace

void IvpConfig::validate() const {
  if (!(dt > 0.0)) fail(ErrorKind::config, "time step must be positive");
  if (!(blowup_threshold > 0.0)) fail(ErrorKind::config, "blow-up threshold must be positive");
}

LinearSystem::LinearSystem(SparseMatrix A, std::function<Eigen::VectorXd(double)> g, GridPtr grid)
    : A_(std::move(A)), g_(std::move(g)), grid_(std::move(grid)) {}

Eigen::VectorXd LinearSystem::rhs(double t, const Eigen::VectorXd& v) const {
  return g_ ? g_(t) : Eigen::VectorXd::Zero(v.size());
}

double LinearSystem::norm(const Eigen::VectorXd& v) const { return x0_norm(v, grid_, 5.0); }

HiblerSystem::HiblerSystem(GridPtr grid, PhysParams pp, ForcingSpec fs, RhsVariant variant)
    : grid_(std::move(grid)), pp_(std::move(pp)), fs_(std::move(fs)), variant_(variant) {
  pp_.validate();
  const bool shifted = variant_ == RhsVariant::F_eps_p || variant_ == RhsVariant::F_eps_p_t;
  eps_ = shifted ? pp_.eps_shift : 0.0;
}

Eigen::Index HiblerSystem::size() const { return DofLayout::of(*grid_).total(); }

SparseMatrix HiblerSystem::op(const Eigen::VectorXd& v) const {
  return assemble_A_eps(unpack(v, grid_), eps_, pp_).matrix;
}

Eigen::VectorXd HiblerSystem::rhs(double t, const Eigen::VectorXd& v) const {
  return pack(assemble_rhs(unpack(v, grid_), t, fs_, pp_, variant_));
}

void HiblerSystem::check(const Eigen::VectorXd& v) const {
  unpack(v, grid_).require_admissible(pp_.kappa, "time step");
}

double HiblerSystem::norm(const Eigen::VectorXd& v) const { return x0_norm(v, grid_, 5.0); }

IvpResult integrate_period(const SemiDiscreteSystem& sys, const Eigen::VectorXd& v0, double T,
                           const IvpConfig& cfg, int align, bool keep_trajectory) {
  cfg.validate();
  if (!(T > 0.0)) fail(ErrorKind::invalid_argument, "period must be positive");
  if (align < 1) fail(ErrorKind::invalid_argument, "alignment must be at least 1");
  if (v0.size() != sys.size()) fail(ErrorKind::shape_mismatch, "initial state has the wrong size");
  sys.check(v0);

  IvpResult res;
  long steps = static_cast<long>(std::ceil(T / cfg.dt - 1e-9));
  steps = ((steps + align - 1) / align) * align;
  res.n_steps = static_cast<int>(steps);
  res.dt_used = T / static_cast<double>(steps);
  res.dt_adjusted = std::abs(res.dt_used - cfg.dt) > 1e-14 * cfg.dt;
  res.trajectory.grid = sys.grid();

  const double dt = res.dt_used;
  Eigen::VectorXd v = v0;
  if (keep_trajectory) {
    res.trajectory.t.push_back(0.0);
    res.trajectory.v.push_back(v);
  }
  for (long n = 0; n < steps; ++n) {
    const double t0 = T * static_cast<double>(n) / static_cast<double>(steps);
    const double t1 = T * static_cast<double>(n + 1) / static_cast<double>(steps);
    const SparseMatrix A0 = sys.op(v);
    const Eigen::VectorXd F0 = sys.rhs(t0, v);
    Eigen::VectorXd next;
    if (cfg.scheme == Scheme::imex_euler) {
      next = implicit_solve(shifted_identity(A0, dt), v + dt * F0);
    } else {
      // Crank-Nicolson predictor with lagged coefficients, then a corrector
      // with coefficients at the midpoint state and trapezoidal forcing.
      const Eigen::VectorXd pred =
          implicit_solve(shifted_identity(A0, 0.5 * dt), v - 0.5 * dt * (A0 * v) + dt * F0);
      guard(sys, pred, t1, cfg.blowup_threshold);
      const Eigen::VectorXd mid = 0.5 * (v + pred);
      const SparseMatrix Am = sys.op(mid);
      const Eigen::VectorXd F1 = sys.rhs(t1, pred);
      next = implicit_solve(shifted_identity(Am, 0.5 * dt), v - 0.5 * dt * (Am * v) + 0.5 * dt * (F0 + F1));
    }
    guard(sys, next, t1, cfg.blowup_threshold);
    v = std::move(next);
    if (keep_trajectory) {
      res.trajectory.t.push_back(t1);
      res.trajectory.v.push_back(v);
    }
  }
  res.final_state = v;
  return res;
}

IvpResult integrate_period(const State& v0, double T, const IvpConfig& cfg, const PhysParams& pp,
                           const ForcingSpec& fs, int align) {
  HiblerSystem sys(v0.grid, pp, fs, cfg.variant);
  return integrate_period(sys, pack(v0), T, cfg, align);
}

ShootingResult shooting_fixed_point(const SemiDiscreteSystem& sys, const Eigen::VectorXd& guess,
                                    double T, const IvpConfig& cfg, const ShootingConfig& scfg) {
  if (!(scfg.theta > 0.0) || scfg.theta > 1.0) {
    fail(ErrorKind::no_progress, "damping theta must lie in (0, 1]");
  }
  if (!(scfg.tol > 0.0)) fail(ErrorKind::invalid_argument, "shooting tolerance must be positive");
  ShootingResult res;
  res.v0 = guess;
  double theta = scfg.theta;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= scfg.max_iter; ++it) {
    const Eigen::VectorXd image = integrate_period(sys, res.v0, T, cfg, 1, false).final_state;
    const double r = sys.norm(image - res.v0);
    res.residual = r;
    res.residual_history.push_back(r);
    res.iterations = it;
    if (r < scfg.tol) break;
    if (it == scfg.max_iter) {
      std::ostringstream msg;
      msg << "shooting did not converge in " << scfg.max_iter << " iterations (residual " << r << ")";
      fail(ErrorKind::no_convergence, msg.str());
    }
    if (r > prev) theta *= 0.5;
    if (theta < 1e-8) fail(ErrorKind::no_progress, "shooting damping collapsed");
    prev = r;
    res.v0 = (1.0 - theta) * res.v0 + theta * image;
  }
  res.theta_final = theta;
  return res;
}

ShootingResult shooting_fixed_point(const State& guess, double T, const IvpConfig& cfg,
                                    const PhysParams& pp, const ForcingSpec& fs,
                                    const ShootingConfig& scfg) {
  HiblerSystem sys(guess.grid, pp, fs, cfg.variant);
  return shooting_fixed_point(sys, pack(guess), T, cfg, scfg);
}

PeriodicTrajectory resample(const TimeSeries& ts, double T, int n_t) {
  if (ts.t.size() < 2 || ts.t.size() != ts.v.size()) {
    fail(ErrorKind::shape_mismatch, "time series needs at least two samples");
  }
  PeriodicTrajectory out;
  out.T = T;
  out.grid = ts.grid;
  std::size_t j = 0;
  for (int k = 0; k < n_t; ++k) {
    const double t = T * k / n_t;
    while (j + 2 < ts.t.size() && ts.t[j + 1] < t) ++j;
    const double t0 = ts.t[j];
    const double t1 = ts.t[j + 1];
    const double w = t1 > t0 ? std::clamp((t - t0) / (t1 - t0), 0.0, 1.0) : 0.0;
    out.snapshots.push_back((1.0 - w) * ts.v[j] + w * ts.v[j + 1]);
  }
  return out;
}

CrossValidation cross_validate(const PeriodicTrajectory& spectral, const TimeSeries& shooting,
                               double p, double q,
                               const std::optional<PeriodicTrajectory>& reference) {
  spectral.validate();
  if (shooting.grid != spectral.grid && !(shooting.grid && spectral.grid && *shooting.grid == *spectral.grid)) {
    fail(ErrorKind::shape_mismatch, "cross validation needs matching grids");
  }
  if (shooting.v.empty() || shooting.v.front().size() != spectral.dofs()) {
    fail(ErrorKind::shape_mismatch, "cross validation needs matching dof counts");
  }
  PeriodicTrajectory shoot = resample(shooting, spectral.T, spectral.n_t());
  shoot.grid = spectral.grid;
  const PeriodicTrajectory diff = spectral - shoot;

  CrossValidation cv;
  cv.abs_F = trajectory_norm(diff, TrajectoryNorm::F_norm, p, q);
  const double base = trajectory_norm(spectral, TrajectoryNorm::F_norm, p, q);
  cv.rel_F = base > 0.0 ? cv.abs_F / base : cv.abs_F;
  if (reference) {
    const double dev = trajectory_norm(spectral - *reference, TrajectoryNorm::F_norm, p, q);
    cv.rel_F_deviation = dev > 0.0 ? cv.abs_F / dev : cv.abs_F;
  }
  for (const auto& s : diff.snapshots) {
    if (spectral.grid) {
      const DofLayout lay = DofLayout::of(*spectral.grid);
      cv.sup_u1 = std::max(cv.sup_u1, s.segment(lay.u1(), lay.velocity).cwiseAbs().maxCoeff());
      cv.sup_u2 = std::max(cv.sup_u2, s.segment(lay.u2(), lay.velocity).cwiseAbs().maxCoeff());
      cv.sup_h = std::max(cv.sup_h, s.segment(lay.h(), lay.scalar).cwiseAbs().maxCoeff());
      cv.sup_a = std::max(cv.sup_a, s.segment(lay.a(), lay.scalar).cwiseAbs().maxCoeff());
    } else {
      cv.sup_u1 = std::max(cv.sup_u1, s.cwiseAbs().maxCoeff());
    }
  }
  return cv;
}

}  // namespace hibler
