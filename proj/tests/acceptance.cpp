// End-to-end acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "hibler/config.hpp"
#include "hibler/errors.hpp"
#include "hibler/fixpoint.hpp"
#include "hibler/operators.hpp"
#include "hibler/periodic_linear.hpp"
#include "hibler/rheology.hpp"
#include "hibler/timemarch.hpp"
#include "oracles.hpp"

using namespace hibler;

namespace {

const std::string kConfigs = HIBLER_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s criterion %d (%s): %s [%.2fs of %.0fs]%s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), secs, budget_s, in_time ? "" : " over time budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome rheology_identities() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> Ue(1.05, 5.0), Ul(-8, 0), Uh(0.1, 3.0), Ua(0.0, 1.0), Uc(1, 30);
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    RheologyParams rp;
    rp.e = Ue(rng);
    rp.delta = std::pow(10.0, Ul(rng));
    rp.c_press = Uc(rng);
    const Tensor2 eps = oracle::random_symmetric(rng);
    const Pressure pr = pressure(Uh(rng), Ua(rng), rp);
    const double P = pr.value;
    const double d2 = delta_squared(eps, rp.e);
    worst = std::max(worst, oracle::rel_err(d2, oracle::delta_sq(eps, rp.e)));
    const double D = delta_delta(eps, rp);
    // Relative to the operands: D^2 - Delta^2 cancels, so delta itself is the wrong scale.
    worst = std::max(worst, std::abs(D * D - d2 - rp.delta) / (D * D));
    const Tensor2 sig = stress_sigma_delta(eps, P, rp);
    const Tensor2 ref = stress_s_delta(eps, P, rp) - 0.5 * P * Tensor2::Identity();
    worst = std::max(worst, (sig - ref).norm() / std::max(ref.norm(), 1e-300));
    worst = std::max(worst, oracle::rel_err(pr.d_da, rp.c_press * P));
  }
  return {worst <= 1e-12, fmt("worst relative error %.2e over 1000 samples", worst)};
}

Outcome operator_consistency() {
  auto g = make_grid(8, 8);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(-1, 1);
  std::normal_distribution<double> N;
  RheologyParams rp;
  rp.delta = 1e-2;
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    State s = State::zeros(g);
    for (std::size_t n = 0; n < g->node_count(); ++n) {
      s.h[n] = 1.0 + 0.3 * U(rng);
      s.a[n] = 0.8 + 0.15 * U(rng);
    }
    const auto H = assemble_hibler_linearized(s, rp, 0.5);
    Eigen::VectorXd w(H.cols());
    for (auto& x : w) x = N(rng);
    w.normalize();
    const Eigen::VectorXd an = H.apply(w);
    const Eigen::VectorXd fd = oracle::fd_jacobian_apply(s, rp, w, 1e-5);
    worst = std::max(worst, (fd - an).norm() / an.norm());
  }
  return {worst <= 1e-6, fmt("worst relative FD mismatch %.2e over 10 states", worst)};
}

Outcome monodromy() {
  auto g = make_grid(16, 16);
  PhysParams pp;
  const auto L = assemble_neumann_laplacian(g, pp.d_h);
  const auto r0 = monodromy_invertibility_check(L.matrix, 1.0, 16, false);
  const bool k0_fails = std::find(r0.failing.begin(), r0.failing.end(), 0) != r0.failing.end();
  const auto A = assemble_A_eps(State::equilibrium(g, 1.0, 1.0), 1e-3, pp);
  const auto r1 = monodromy_invertibility_check(A.matrix, 1.0, 16, false);
  double smin = 1e300;
  for (const auto& m : r1.modes) smin = std::min(smin, m.sigma_min);
  return {k0_fails && r1.pass,
          fmt("unshifted k=0 %s; shifted min sigma %.3e vs threshold %.3e, %zu failing", k0_fails ? "fails" : "passes",
              smin, r1.threshold, r1.failing.size())};
}

Outcome periodic_linear() {
  SparseMatrix one(1, 1);
  one.insert(0, 0) = 1.0;
  const double T = 2 * M_PI;
  const auto g = PeriodicTrajectory::from_function(32, T, nullptr, [](double t) {
    return Eigen::VectorXd::Constant(1, std::cos(t));
  });
  const double scalar_err = std::abs(PeriodicSolver(one, T, 32).solve(g).at(0)[0] - 0.5);

  auto run = [](int n, int n_t, bool discrete) {
    auto gr = make_grid(n, n);
    SparseMatrix A = assemble_neumann_laplacian(gr, 1.0).matrix;
    for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += 1.0;
    const double h = 1.0 / (n + 1);
    const double lam = discrete ? 2 * (2 - 2 * std::cos(M_PI * h)) / (h * h) : 2 * M_PI * M_PI;
    auto field = [&](double scale) {
      Eigen::VectorXd v(gr->node_count());
      for (int j = 0; j < gr->nodes_y(); ++j)
        for (int i = 0; i < gr->nodes_x(); ++i)
          v[gr->index(i, j)] = scale * std::cos(M_PI * gr->x(i)) * std::cos(M_PI * gr->y(j));
      return v;
    };
    PeriodicTrajectory G, W;
    G.T = W.T = 1.0;
    for (int k = 0; k < n_t; ++k) {
      const double t = double(k) / n_t, s = std::exp(std::sin(2 * M_PI * t));
      G.snapshots.push_back(field(2 * M_PI * std::cos(2 * M_PI * t) * s + (1 + lam) * s));
      W.snapshots.push_back(field(s));
    }
    const auto S = PeriodicSolver(A, 1.0, n_t).solve(G);
    double err = 0;
    for (int k = 0; k < n_t; ++k) err = std::max(err, (S.at(k) - W.at(k)).cwiseAbs().maxCoeff());
    return err;
  };
  const double ratio = run(16, 16, true) / run(16, 32, true);
  const double e1 = run(7, 32, false), e3 = run(31, 32, false);
  const double slope = std::log(e3 / e1) / std::log(8.0 / 32.0);
  return {scalar_err <= 1e-12 && ratio >= 10.0 && slope >= 1.9,
          fmt("scalar error %.1e, temporal ratio %.2e, spatial slope %.3f", scalar_err, ratio, slope)};
}

Outcome equilibrium_fixed_point() {
  const auto c = parse_config(kConfigs + "/rest.ini");
  const auto res = solve_periodic_quasilinear(c.fixpoint, c.physics, c.forcing, c.v_star());
  const FixpointProblem p(c.v_star(), c.physics, c.forcing, c.fixpoint);
  double dev = 0;
  for (int k = 0; k < res.trajectory.n_t(); ++k)
    dev = std::max(dev, (res.trajectory.at(k) - p.star().at(k)).cwiseAbs().maxCoeff());
  const auto& it = res.log.iterations;
  const bool ok = res.log.converged && it.size() == 1 && it[0].increment < 1e-12 && dev < 1e-12;
  return {ok, fmt("%zu iteration(s), increment %.1e, max deviation from v* %.1e", it.size(),
                  it.empty() ? -1.0 : it[0].increment, dev)};
}

// Shared by criteria 6 and 8: contraction, h >= kappa, and uniqueness over restarts.
Outcome small_forcing_checks(const ParsedConfig& c, bool check_periodic_sources) {
  const FixpointProblem p(c.v_star(), c.physics, c.forcing, c.fixpoint);
  const auto res = solve_periodic_quasilinear(p);
  bool ratios_ok = res.log.converged;
  for (std::size_t i = 1; i < res.log.iterations.size(); ++i) ratios_ok = ratios_ok && res.log.iterations[i].ratio < 1.0;
  const double q = res.log.contraction_factor;

  const DofLayout lay = DofLayout::of(*c.grid);
  double min_h = 1e300;
  for (int k = 0; k < res.trajectory.n_t(); ++k)
    min_h = std::min(min_h, res.trajectory.at(k).segment(lay.h(), lay.scalar).minCoeff());
  const bool h_ok = min_h >= c.physics.kappa;

  const double tol = c.fixpoint.tol;
  double spread = 0;
  for (int r = 0; r < c.restarts; ++r) {
    const auto start = p.random_ball_point(0.5 * c.fixpoint.R, 1000 + r);
    const auto other = solve_periodic_quasilinear(p, start);
    spread = std::max(spread, p.e_norm(other.trajectory - res.trajectory));
  }
  const bool unique = spread <= 10 * tol;

  bool periodic = true;
  if (check_periodic_sources) {
    const auto& v = res.trajectory;
    const auto& f = c.forcing.f;
    for (int k = 0; k < v.n_t(); ++k) {
      const long kk = k + v.n_t();
      const double t0 = v.time(k), t1 = c.forcing.T * kk / v.n_t();
      const Field a = thermo_Sh(v.state(k), f, t0), b = thermo_Sh(v.state(kk), f, t1);
      const Field sa = thermo_Sa(v.state(k), f, c.physics.kappa, t0),
                  sb = thermo_Sa(v.state(kk), f, c.physics.kappa, t1);
      for (std::size_t i = 0; i < a.size(); ++i)
        periodic = periodic && std::abs(a[i] - b[i]) <= 1e-15 && std::abs(sa[i] - sb[i]) <= 1e-15;
    }
  }
  std::string detail = fmt("%zu iterations, contraction %.3f (target <= 0.75), min h %.4f, restart spread %.1e",
                           res.log.iterations.size(), q, min_h, spread);
  if (check_periodic_sources) detail += periodic ? ", sources N_t-periodic" : ", sources NOT periodic";
  return {ratios_ok && q < 1.0 && h_ok && unique && periodic, detail};
}

Outcome small_forcing() { return small_forcing_checks(parse_config(kConfigs + "/small_forcing.ini"), false); }

Outcome cross_solver() {
  // Matched settings on a coarser grid so a shooting period stays cheap.
  const auto c = parse_config(kConfigs + "/small_forcing.ini",
                              {"grid.nx=8", "grid.ny=8", "solver.dt=0.00390625", "solver.tol_shoot=1e-12"});
  const FixpointProblem p(c.v_star(), c.physics, c.forcing, c.fixpoint);
  const auto spec = solve_periodic_quasilinear(p);
  const auto sh = shooting_fixed_point(c.v_star(), c.forcing.T, c.ivp, c.physics, c.forcing, c.shooting);
  HiblerSystem sys(c.grid, c.physics, c.forcing, c.ivp.variant);
  const auto orbit = integrate_period(sys, sh.v0, c.forcing.T, c.ivp, c.fixpoint.n_t);
  const auto cv = cross_validate(spec.trajectory, orbit.trajectory, c.fixpoint.p, c.fixpoint.q, p.star());
  return {cv.rel_F <= 1e-4,
          fmt("relative F discrepancy %.2e (bound 1e-4); relative to the periodic deviation %.2e; "
              "shooting %d iterations",
              cv.rel_F, cv.rel_F_deviation, sh.iterations)};
}

Outcome corollary_modes() {
  const Outcome w = small_forcing_checks(parse_config(kConfigs + "/wind_shape.ini"), false);
  const Outcome t = small_forcing_checks(parse_config(kConfigs + "/seasonal_growth.ini"), true);
  return {w.pass && t.pass, "wind_shape: " + w.detail + "; time-dependent f: " + t.detail};
}

Outcome parameter_recipe() {
  const auto base = select_parameters(1.0, 1.0, 0.0, {{1.0, 1.0}}, 1.0);
  bool ok = std::abs(base.R - 0.125) < 1e-12 && std::abs(base.delta_small - 0.03125) < 1e-12;
  const std::vector<std::pair<double, double>> table = {{0.01, 0.5}, {0.1, 2.0}, {1.0, 40.0}};
  double pr = 1e300, pd = 1e300;
  for (double M : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const auto c = select_parameters(M, 1.0, 0.0, table, 1.0);
    ok = ok && c.R <= pr && c.delta_small <= pd;
    pr = c.R, pd = c.delta_small;
  }
  pr = pd = 1e300;
  for (double s : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    auto t = table;
    for (auto& [r, l] : t) l *= s;
    const auto c = select_parameters(1.0, 1.0, 0.0, t, 1.0);
    ok = ok && c.R <= pr && c.delta_small <= pd;
    pr = c.R, pd = c.delta_small;
  }
  return {ok, fmt("R = %.6g, delta = %.6g; monotone in M and L", base.R, base.delta_small)};
}

}  // namespace

int main() {
  criterion(1, "rheology identities", 1, rheology_identities);
  criterion(2, "operator consistency", 30, operator_consistency);
  criterion(3, "discrete invertibility check", 10, monodromy);
  criterion(4, "periodic linear solver", 60, periodic_linear);
  criterion(5, "equilibrium fixed point", 10, equilibrium_fixed_point);
  criterion(6, "small-forcing periodic solution", 300, small_forcing);
  criterion(7, "cross-solver agreement", 600, cross_solver);
  criterion(8, "corollary modes", 600, corollary_modes);
  criterion(9, "parameter recipe", 1, parameter_recipe);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
