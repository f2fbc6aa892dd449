#include "hibler/periodic_linear.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <string>

#include <unsupported/Eigen/FFT>

#include "hibler/errors.hpp"
#include "hibler/parallel.hpp"

namespace hibler {

namespace {

using Complex = std::complex<double>;

void require_exponents(double p, double q) {
  if (!(p > 1.0) || !std::isfinite(p) || !(q > 1.0) || !std::isfinite(q)) {
    fail(ErrorKind::invalid_exponent, "norm exponents p, q must lie in (1, inf)");
  }
}

void require_same_shape(const PeriodicTrajectory& a, const PeriodicTrajectory& b) {
  if (a.n_t() != b.n_t() || a.dofs() != b.dofs() || a.T != b.T) {
    fail(ErrorKind::shape_mismatch, "trajectories differ in period, n_t or dof count");
  }
}

// Half spectrum: modes k = 0..n/2 of every dof, as n/2 + 1 complex vectors.
std::vector<Eigen::VectorXcd> forward(const PeriodicTrajectory& w) {
  const int n = w.n_t();
  const Eigen::Index N = w.dofs();
  std::vector<Eigen::VectorXcd> hat(static_cast<std::size_t>(n / 2 + 1), Eigen::VectorXcd(N));
  Eigen::FFT<double> fft;
  std::vector<double> in(static_cast<std::size_t>(n));
  std::vector<Complex> out;
  for (Eigen::Index r = 0; r < N; ++r) {
    for (int k = 0; k < n; ++k) in[static_cast<std::size_t>(k)] = w.snapshots[static_cast<std::size_t>(k)][r];
    fft.fwd(out, in);
    for (int k = 0; k <= n / 2; ++k) hat[static_cast<std::size_t>(k)][r] = out[static_cast<std::size_t>(k)];
  }
  return hat;
}

// Inverse of `forward`, enforcing conjugate symmetry.
std::vector<Eigen::VectorXd> inverse(const std::vector<Eigen::VectorXcd>& hat, int n) {
  const Eigen::Index N = hat.front().size();
  std::vector<Eigen::VectorXd> snaps(static_cast<std::size_t>(n), Eigen::VectorXd(N));
  Eigen::FFT<double> fft;
  std::vector<Complex> full(static_cast<std::size_t>(n));
  std::vector<Complex> out;
  for (Eigen::Index r = 0; r < N; ++r) {
    full[0] = hat[0][r].real();
    for (int k = 1; k < n / 2; ++k) {
      full[static_cast<std::size_t>(k)] = hat[static_cast<std::size_t>(k)][r];
      full[static_cast<std::size_t>(n - k)] = std::conj(hat[static_cast<std::size_t>(k)][r]);
    }
    full[static_cast<std::size_t>(n / 2)] = hat[static_cast<std::size_t>(n / 2)][r].real();
    fft.inv(out, full);
    for (int k = 0; k < n; ++k) snaps[static_cast<std::size_t>(k)][r] = out[static_cast<std::size_t>(k)].real();
  }
  return snaps;
}

double field_norm(const Eigen::VectorXd& v, const GridPtr& grid, double q, int order) {
  if (!grid) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]), q);
    return std::pow(acc, 1.0 / q);
  }
  const State s = unpack(v, grid);
  const double terms[4] = {spatial_norm(s.u.x, *grid, q, order), spatial_norm(s.u.y, *grid, q, order),
                           spatial_norm(s.h, *grid, q, order), spatial_norm(s.a, *grid, q, order)};
  return lq_combine(terms, q);
}

double lp_in_time(const PeriodicTrajectory& w, double p, double q, int order) {
  const double dt = w.T / w.n_t();
  std::vector<double> norms(static_cast<std::size_t>(w.n_t()));
  parallel_for(norms.size(), [&](std::size_t k) {
    norms[k] = field_norm(w.snapshots[k], w.grid, q, order);
  });
  double acc = 0.0;
  for (double x : norms) acc += dt * std::pow(x, p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

const Eigen::VectorXd& PeriodicTrajectory::at(long k) const {
  const long n = n_t();
  return snapshots[static_cast<std::size_t>(((k % n) + n) % n)];
}

State PeriodicTrajectory::state(long k) const {
  if (!grid) fail(ErrorKind::shape_mismatch, "trajectory has no grid");
  return unpack(at(k), grid);
}

void PeriodicTrajectory::validate() const {
  const int n = n_t();
  if (n < 4 || n % 2 != 0) {
    fail(ErrorKind::invalid_argument, "n_t must be even and at least 4, got " + std::to_string(n));
  }
  if (!(T > 0.0)) fail(ErrorKind::invalid_argument, "period must be positive");
  const Eigen::Index N = dofs();
  for (const auto& s : snapshots) {
    if (s.size() != N) fail(ErrorKind::shape_mismatch, "snapshots differ in size");
  }
  if (grid && N != DofLayout::of(*grid).total()) {
    fail(ErrorKind::shape_mismatch, "snapshot size does not match the grid layout");
  }
}

PeriodicTrajectory PeriodicTrajectory::constant(const Eigen::VectorXd& v, int n_t, double T,
                                                GridPtr grid) {
  PeriodicTrajectory w;
  w.T = T;
  w.grid = std::move(grid);
  w.snapshots.assign(static_cast<std::size_t>(n_t), v);
  return w;
}

PeriodicTrajectory PeriodicTrajectory::zeros(Eigen::Index dofs, int n_t, double T, GridPtr grid) {
  return constant(Eigen::VectorXd::Zero(dofs), n_t, T, std::move(grid));
}

PeriodicTrajectory PeriodicTrajectory::from_function(
    int n_t, double T, GridPtr grid, const std::function<Eigen::VectorXd(double)>& f) {
  PeriodicTrajectory w;
  w.T = T;
  w.grid = std::move(grid);
  w.snapshots.reserve(static_cast<std::size_t>(n_t));
  for (int k = 0; k < n_t; ++k) w.snapshots.push_back(f(T * k / n_t));
  return w;
}

PeriodicTrajectory operator+(const PeriodicTrajectory& a, const PeriodicTrajectory& b) {
  require_same_shape(a, b);
  PeriodicTrajectory out = a;
  for (std::size_t k = 0; k < out.snapshots.size(); ++k) out.snapshots[k] += b.snapshots[k];
  return out;
}

PeriodicTrajectory operator-(const PeriodicTrajectory& a, const PeriodicTrajectory& b) {
  require_same_shape(a, b);
  PeriodicTrajectory out = a;
  for (std::size_t k = 0; k < out.snapshots.size(); ++k) out.snapshots[k] -= b.snapshots[k];
  return out;
}

PeriodicTrajectory operator*(double s, const PeriodicTrajectory& a) {
  PeriodicTrajectory out = a;
  for (auto& v : out.snapshots) v *= s;
  return out;
}

PeriodicTrajectory spectral_derivative(const PeriodicTrajectory& w) {
  w.validate();
  const int n = w.n_t();
  std::vector<Eigen::VectorXcd> hat = forward(w);
  const double omega = 2.0 * M_PI / w.T;
  hat[0].setZero();
  for (int k = 1; k < n / 2; ++k) hat[static_cast<std::size_t>(k)] *= Complex(0.0, omega * k);
  hat[static_cast<std::size_t>(n / 2)].setZero();
  PeriodicTrajectory d;
  d.T = w.T;
  d.grid = w.grid;
  d.snapshots = inverse(hat, n);
  return d;
}

double x0_norm(const Eigen::VectorXd& v, const GridPtr& grid, double q) {
  require_exponents(2.0, q);
  return field_norm(v, grid, q, 0);
}

double x1_norm(const Eigen::VectorXd& v, const GridPtr& grid, double q) {
  require_exponents(2.0, q);
  return field_norm(v, grid, q, grid ? 2 : 0);
}

double trajectory_norm(const PeriodicTrajectory& traj, TrajectoryNorm which, double p, double q) {
  require_exponents(p, q);
  traj.validate();
  if (which == TrajectoryNorm::F_norm) return lp_in_time(traj, p, q, 0);
  const PeriodicTrajectory d = spectral_derivative(traj);
  return lp_in_time(d, p, q, 0) + lp_in_time(traj, p, q, traj.grid ? 2 : 0);
}

double trace_proxy_norm(const PeriodicTrajectory& traj, double q) {
  double m = 0.0;
  for (const auto& s : traj.snapshots) m = std::max(m, field_norm(s, traj.grid, q, traj.grid ? 1 : 0));
  return m;
}

struct PeriodicSolver::Impl {
  SparseMatrix A;
  double T = 1.0;
  int n_t = 0;
  MonodromyReport report;
  std::vector<std::unique_ptr<Eigen::SparseLU<ComplexSparse>>> lu;  // modes 0..n_t/2 - 1
  std::unique_ptr<Eigen::SparseLU<ComplexSparse>> nyquist_probe;
};

PeriodicSolver::PeriodicSolver(const SparseMatrix& A, double T, int n_t, double rel_threshold)
    : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) fail(ErrorKind::shape_mismatch, "periodic solver needs a square operator");
  if (n_t < 4 || n_t % 2 != 0) {
    fail(ErrorKind::invalid_argument, "n_t must be even and at least 4, got " + std::to_string(n_t));
  }
  if (!(T > 0.0)) fail(ErrorKind::invalid_argument, "period must be positive");
  Impl& s = *impl_;
  s.A = A;
  s.T = T;
  s.n_t = n_t;
  const int half = n_t / 2;
  s.lu.resize(static_cast<std::size_t>(half));
  std::vector<double> sigma(static_cast<std::size_t>(half) + 1, 0.0);
  const double omega = 2.0 * M_PI / T;

  // Every representable mode, Nyquist included, is probed; the Nyquist
  // factorization is only needed for that probe.
  parallel_for(static_cast<std::size_t>(half) + 1, [&](std::size_t k) {
    auto lu = std::make_unique<Eigen::SparseLU<ComplexSparse>>();
    lu->compute(shifted_complex(s.A, {0.0, omega * static_cast<double>(k)}));
    if (lu->info() == Eigen::Success) sigma[k] = smallest_singular_value(*lu, s.A.rows());
    if (k < static_cast<std::size_t>(half)) {
      s.lu[k] = std::move(lu);
    } else {
      s.nyquist_probe = std::move(lu);
    }
  });
  s.nyquist_probe.reset();

  s.report.period = T;
  s.report.norm1 = norm1(A);
  s.report.threshold = rel_threshold * s.report.norm1;
  for (int k = -half; k <= half; ++k) {
    const double sg = sigma[static_cast<std::size_t>(std::abs(k))];
    const bool ok = sg > s.report.threshold;
    s.report.modes.push_back({k, sg, ok});
    if (!ok) s.report.failing.push_back(k);
  }
  s.report.pass = s.report.failing.empty();
  if (!s.report.pass) {
    std::string list;
    for (int k : s.report.failing) list += (list.empty() ? "" : ", ") + std::to_string(k);
    throw ResonanceError(s.report.failing,
                         "periodic problem is resonant at temporal modes k = {" + list + "}");
  }
}

PeriodicSolver::~PeriodicSolver() = default;
PeriodicSolver::PeriodicSolver(PeriodicSolver&&) noexcept = default;
PeriodicSolver& PeriodicSolver::operator=(PeriodicSolver&&) noexcept = default;

const MonodromyReport& PeriodicSolver::report() const { return impl_->report; }
const SparseMatrix& PeriodicSolver::matrix() const { return impl_->A; }
double PeriodicSolver::period() const { return impl_->T; }
int PeriodicSolver::n_t() const { return impl_->n_t; }

PeriodicTrajectory PeriodicSolver::solve(const PeriodicTrajectory& g) const {
  const Impl& s = *impl_;
  g.validate();
  if (g.n_t() != s.n_t || g.dofs() != s.A.rows() || std::abs(g.T - s.T) > 1e-14 * s.T) {
    fail(ErrorKind::shape_mismatch, "forcing does not match the solver's period, n_t or size");
  }
  std::vector<Eigen::VectorXcd> hat = forward(g);
  const int half = s.n_t / 2;
  std::vector<Eigen::VectorXcd> sol(hat.size());
  parallel_for(hat.size(), [&](std::size_t k) {
    // Nyquist: the spectral derivative vanishes there, so the mode solves A w = g.
    auto& lu = *s.lu[k == static_cast<std::size_t>(half) ? 0 : k];
    sol[k] = lu.solve(hat[k]);
    if (lu.info() != Eigen::Success) {
      fail(ErrorKind::factorization_failure, "mode solve failed at k = " + std::to_string(k));
    }
  });
  PeriodicTrajectory w;
  w.T = g.T;
  w.grid = g.grid;
  w.snapshots = inverse(sol, s.n_t);
  return w;
}

PeriodicTrajectory solve_periodic_linear(const DiscreteOperator& A, const PeriodicTrajectory& g,
                                         double T) {
  PeriodicTrajectory gg = g;
  gg.T = T;
  PeriodicSolver solver(A.matrix, T, g.n_t());
  PeriodicTrajectory w = solver.solve(gg);
  if (!w.grid) w.grid = A.grid;
  return w;
}

double periodic_residual(const SparseMatrix& A, const PeriodicTrajectory& w,
                         const PeriodicTrajectory& g, double p, double q) {
  require_same_shape(w, g);
  PeriodicTrajectory r = spectral_derivative(w);
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    r.snapshots[k] += A * w.snapshots[k] - g.snapshots[k];
  }
  return trajectory_norm(r, TrajectoryNorm::F_norm, p, q);
}

double estimate_maxreg_constant(const DiscreteOperator& A, double T, int n_probes, int n_t,
                                std::uint64_t seed, double p, double q) {
  if (n_probes <= 0) {
    fail(ErrorKind::invalid_probe_count, "n_probes must be positive, got " + std::to_string(n_probes));
  }
  require_exponents(p, q);
  PeriodicSolver solver(A.matrix, T, n_t);
  double M = 0.0;
  for (int i = 0; i < n_probes; ++i) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1));
    std::normal_distribution<double> nd;
    PeriodicTrajectory g = PeriodicTrajectory::zeros(A.rows(), n_t, T, A.grid);
    for (auto& s : g.snapshots) {
      for (Eigen::Index r = 0; r < s.size(); ++r) s[r] = nd(rng);
    }
    const double gn = trajectory_norm(g, TrajectoryNorm::F_norm, p, q);
    if (!(gn > 0.0)) continue;
    g = (1.0 / gn) * g;
    const PeriodicTrajectory w = solver.solve(g);
    M = std::max(M, trajectory_norm(w, TrajectoryNorm::E_norm, p, q));
  }
  return M;
}

}  // namespace hibler
