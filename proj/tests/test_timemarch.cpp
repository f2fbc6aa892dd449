#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hibler/errors.hpp"
#include "hibler/fixpoint.hpp"
#include "hibler/timemarch.hpp"

using namespace hibler;

namespace {

LinearSystem surrogate() {
  SparseMatrix A(1, 1);
  A.insert(0, 0) = 1.0;
  return LinearSystem(A, [](double t) {
    Eigen::VectorXd g(1);
    g[0] = std::cos(t);
    return g;
  });
}

Eigen::VectorXd scalar(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("scalar surrogate over one period") {
  const auto sys = surrogate();
  const double T = 2 * M_PI;
  double prev = 0;
  for (double dt : {T / 64, T / 128, T / 256}) {
    IvpConfig cfg;
    cfg.dt = dt;
    const double err = std::abs(integrate_period(sys, scalar(0.5), T, cfg).final_state[0] - 0.5);
    CHECK(err < 10 * dt * dt);
    if (prev > 0) CHECK(prev / err > 3.5);
    prev = err;
  }
  IvpConfig euler;
  euler.scheme = Scheme::imex_euler;
  euler.dt = T / 256;
  CHECK(std::abs(integrate_period(sys, scalar(0.5), T, euler).final_state[0] - 0.5) < 0.05);
}

TEST_CASE("time step is adjusted to divide the period") {
  const auto sys = surrogate();
  IvpConfig cfg;
  cfg.dt = 0.3;
  const auto r = integrate_period(sys, scalar(0.5), 1.0, cfg, 4);
  CHECK(r.dt_adjusted);
  CHECK(r.n_steps % 4 == 0);
  CHECK(r.n_steps * r.dt_used == doctest::Approx(1.0));
  CHECK(r.dt_used <= 0.3);
  cfg.dt = 0.25;
  CHECK_FALSE(integrate_period(sys, scalar(0.5), 1.0, cfg).dt_adjusted);
}

TEST_CASE("equilibrium stays put") {
  auto g = make_grid(8, 8);
  PhysParams pp;
  ForcingSpec fs;
  IvpConfig cfg;
  cfg.dt = 1.0 / 32;
  const State vs = State::equilibrium(g, 1.0, 1.0);
  const auto r = integrate_period(vs, 1.0, cfg, pp, fs);
  for (const auto& v : r.trajectory.v) CHECK((v - pack(vs)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("blow-up is reported") {
  SparseMatrix A(1, 1);
  A.insert(0, 0) = -50.0;
  LinearSystem sys(A, {});
  IvpConfig cfg;
  cfg.dt = 0.01;
  try {
    integrate_period(sys, scalar(1.0), 1.0, cfg);
    FAIL("expected blow-up");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::blow_up);
  }
}

TEST_CASE("shooting on the scalar surrogate") {
  const auto sys = surrogate();
  IvpConfig cfg;
  cfg.dt = 2 * M_PI / 512;
  ShootingConfig sc;
  sc.tol = 1e-12;
  const auto r = shooting_fixed_point(sys, scalar(0.0), 2 * M_PI, cfg, sc);
  CHECK(r.residual < 1e-12);
  CHECK(std::abs(r.v0[0] - 0.5) < 1e-4);
  sc.theta = 0.0;
  try {
    shooting_fixed_point(sys, scalar(0.0), 2 * M_PI, cfg, sc);
    FAIL("expected no-progress");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_progress);
  }
}

TEST_CASE("shooting returns to rest from a bump") {
  auto g = make_grid(6, 6);
  PhysParams pp;
  pp.rheology.delta = 1e-2;
  ForcingSpec fs;
  fs.f = GrowthRate::restoring(0.5, 1.0);
  IvpConfig cfg;
  cfg.dt = 1.0 / 32;
  State guess = State::equilibrium(g, 1.0, 1.0);
  const Field bump = make_profile(Profile::gaussian_bump, *g);
  for (std::size_t n = 0; n < bump.size(); ++n) guess.h[n] += 1e-3 * bump[n];
  ShootingConfig sc;
  sc.tol = 1e-10;
  const auto r = shooting_fixed_point(guess, 1.0, cfg, pp, fs, sc);
  CHECK((r.v0 - pack(State::equilibrium(g, 1.0, 1.0))).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("frozen linear problem: one period maps snapshot 0 to itself") {
  auto g = make_grid(6, 6);
  PhysParams pp;
  pp.rheology.delta = 1e-2;
  ForcingSpec fs;
  fs.f = GrowthRate::restoring(0.5, 1.0);
  fs.g_h = PeriodicSignal::sinusoid(1e-3, make_profile(Profile::gaussian_bump, *g), 16, 1.0);
  FixpointConfig fc;
  fc.n_t = 16;
  const FixpointProblem problem(State::equilibrium(g, 1.0, 1.0), pp, fs, fc);
  // Periodic data for w' + A* w = G at collocation, G band-limited so the
  // trigonometric interpolant is the exact forcing between nodes.
  const auto G = problem.rhs(problem.star());
  const auto w = problem.solver().solve(G);
  auto forcing = [&](double t) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(G.dofs());
    // G = const + sin(2 pi t) * s, recovered from two samples.
    const Eigen::VectorXd c = G.at(0);
    const Eigen::VectorXd s = G.at(4) - c;  // t = 1/4
    out = c + std::sin(2 * M_PI * t) * s;
    return out;
  };
  LinearSystem sys(problem.A_star(), forcing, g);
  double prev = 0;
  for (double dt : {1.0 / 64, 1.0 / 128}) {
    IvpConfig cfg;
    cfg.dt = dt;
    const auto r = integrate_period(sys, w.at(0), 1.0, cfg);
    const double err = (r.final_state - w.at(0)).cwiseAbs().maxCoeff();
    if (prev > 0) CHECK(prev / err > 3.0);
    prev = err;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("cross validation reports") {
  auto g = make_grid(5, 5);
  const Eigen::VectorXd v = pack(State::equilibrium(g, 1.0, 0.9));
  const auto spec = PeriodicTrajectory::constant(v, 8, 1.0, g);
  TimeSeries ts;
  ts.grid = g;
  for (int k = 0; k <= 16; ++k) {
    ts.t.push_back(k / 16.0);
    ts.v.push_back(v);
  }
  const auto same = cross_validate(spec, ts);
  CHECK(same.abs_F == 0.0);
  CHECK(same.sup_h == 0.0);

  const DofLayout lay = DofLayout::of(*g);
  for (auto& s : ts.v) s.segment(lay.h(), lay.scalar).array() += 1e-3;
  const auto off = cross_validate(spec, ts);
  CHECK(off.sup_h == doctest::Approx(1e-3));
  CHECK(off.sup_a == 0.0);
  CHECK(off.sup_u1 == 0.0);
}

TEST_CASE("halving dt shrinks the shooting-spectral discrepancy about fourfold") {
  auto g = make_grid(6, 6);
  PhysParams pp;
  pp.rheology.delta = 1e-2;
  ForcingSpec fs;
  fs.f = GrowthRate::restoring(0.5, 1.0);
  fs.g_h = PeriodicSignal::sinusoid(2.5e-5, make_profile(Profile::gaussian_bump, *g), 32, 1.0);
  FixpointConfig fc;
  fc.n_t = 32;
  fc.tol = 1e-13;
  const State vs = State::equilibrium(g, 1.0, 1.0);
  const FixpointProblem problem(vs, pp, fs, fc);
  const auto spec = solve_periodic_quasilinear(problem);
  ShootingConfig sc;
  sc.tol = 1e-13;
  std::vector<double> dev;
  for (double dt : {1.0 / 64, 1.0 / 128}) {
    IvpConfig cfg;
    cfg.dt = dt;
    cfg.variant = RhsVariant::F_eps_p;
    const auto sh = shooting_fixed_point(vs, 1.0, cfg, pp, fs, sc);
    HiblerSystem sys(g, pp, fs, cfg.variant);
    const auto orbit = integrate_period(sys, sh.v0, 1.0, cfg, fc.n_t);
    dev.push_back(cross_validate(spec.trajectory, orbit.trajectory, 5, 5, problem.star()).abs_F);
  }
  MESSAGE("discrepancies " << dev[0] << " " << dev[1]);
  CHECK(dev[0] / dev[1] > 3.0);
  CHECK(dev[0] / dev[1] < 5.0);
}
