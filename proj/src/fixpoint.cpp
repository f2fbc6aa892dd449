#include "hibler/fixpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hibler/errors.hpp"
#include "hibler/parallel.hpp"

namespace hibler {

namespace {

// (sum_k dt |(f_1, .., f_m)(t_k)|^p)^(1/p) with the components combined in l^q.
double fields_F_norm(const Grid2D& g, double T, int n_t, double p, double q,
                     const std::function<std::vector<Field>(double)>& at) {
  const double dt = T / n_t;
  double acc = 0.0;
  for (int k = 0; k < n_t; ++k) {
    const std::vector<Field> fs = at(T * k / n_t);
    std::vector<double> terms;
    terms.reserve(fs.size());
    for (const Field& f : fs) terms.push_back(spatial_norm(f, g, q, 0));
    acc += dt * std::pow(lq_combine(terms, q), p);
  }
  return std::pow(acc, 1.0 / p);
}

AssumptionCheck make_check(std::string name, std::string relation, double value, double threshold) {
  bool pass = false;
  if (relation == "<") pass = value < threshold;
  else if (relation == "<=") pass = value <= threshold;
  else if (relation == ">") pass = value > threshold;
  else if (relation == ">=") pass = value >= threshold;
  return {std::move(name), std::move(relation), value, threshold, pass};
}

void require_constant_star(const State& v) {
  v.check_shape();
  const auto flat = [](const Field& f) {
    return std::all_of(f.begin(), f.end(), [&](double x) { return x == f.front(); });
  };
  const auto zero = [](const Field& f) {
    return std::all_of(f.begin(), f.end(), [](double x) { return x == 0.0; });
  };
  if (!flat(v.h) || !flat(v.a) || !zero(v.u.x) || !zero(v.u.y)) {
    fail(ErrorKind::invalid_argument, "v_star must be (0, h*, a*) with constant h*, a*");
  }
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t i) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
}

}  // namespace

void FixpointConfig::validate() const {
  if (!(R > 0.0)) fail(ErrorKind::config, "solver: R must be positive");
  if (!(delta_small > 0.0)) fail(ErrorKind::config, "solver: delta_small must be positive");
  if (!(eps_shift >= 0.0)) fail(ErrorKind::config, "solver: eps_shift must be nonnegative");
  if (!(c_s > 0.0) || !(c_f > 0.0)) fail(ErrorKind::config, "solver: c_s and c_f must be positive");
  if (!(tol > 0.0)) fail(ErrorKind::config, "solver: tol must be positive");
  if (max_iter < 1) fail(ErrorKind::config, "solver: max_iter must be at least 1");
  if (n_t < 4 || n_t % 2 != 0) fail(ErrorKind::config, "solver: n_t must be even and at least 4");
  if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q)) {
    fail(ErrorKind::invalid_exponent, "solver: p and q must lie in (1, inf)");
  }
}

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.pass; });
}

const AssumptionCheck& AssumptionReport::get(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  fail(ErrorKind::invalid_argument, "no assumption check named '" + name + "'");
}

AssumptionReport check_assumptions(const State& v_star, const PhysParams& pp, const ForcingSpec& fs,
                                   const FixpointConfig& cfg, bool time_dependent_f) {
  require_constant_star(v_star);
  const Grid2D& g = *v_star.grid;
  const std::size_t n = g.node_count();
  const double T = fs.T;
  const int n_t = cfg.n_t;
  const double quarter = cfg.delta_small / 4.0;
  const std::string p1 = time_dependent_f ? "PT1" : "P1";
  const std::string p2 = time_dependent_f ? "PT2" : "P2";
  const std::optional<double> no_time;

  AssumptionReport rep;
  const double gradH = fields_F_norm(g, T, n_t, cfg.p, cfg.q, [&](double t) {
    VectorField h = fs.grad_H.at(t, n);
    for (auto& x : h.x) x *= pp.g_grav;
    for (auto& y : h.y) y *= pp.g_grav;
    return std::vector<Field>{h.x, h.y};
  });
  rep.checks.push_back(make_check(p1 + ".gradH", "<", gradH, quarter));

  auto source_time = [&](double t) { return time_dependent_f ? std::optional<double>(t) : no_time; };
  const double sh = fields_F_norm(g, T, n_t, cfg.p, cfg.q, [&](double t) {
    return std::vector<Field>{thermo_Sh(v_star, fs.f, source_time(t))};
  });
  rep.checks.push_back(make_check(p1 + ".S_h", "<", sh, quarter));
  double sa = std::numeric_limits<double>::infinity();
  if (v_star.h.front() >= pp.kappa) {
    sa = fields_F_norm(g, T, n_t, cfg.p, cfg.q, [&](double t) {
      return std::vector<Field>{thermo_Sa(v_star, fs.f, pp.kappa, source_time(t))};
    });
  }
  rep.checks.push_back(make_check(p1 + ".S_a", "<", sa, quarter));

  const double h_star = v_star.h.front();
  const double a_star = v_star.a.front();
  rep.checks.push_back(make_check(p2 + ".c_cor", "<", pp.c_cor, cfg.c_s));
  rep.checks.push_back(make_check(p2 + ".h_star_lower", ">", h_star, 0.5 * cfg.c_s));
  rep.checks.push_back(make_check(p2 + ".h_star_upper", "<", h_star, 2.0 * cfg.c_s));
  rep.checks.push_back(make_check(p2 + ".a_star_lower", ">", a_star, 0.5 * cfg.c_s));
  rep.checks.push_back(make_check(p2 + ".a_star_upper", "<", a_star, 2.0 * cfg.c_s));
  rep.checks.push_back(make_check(p2 + ".f_C1", "<", fs.f.c1_bound(), cfg.c_f));

  // Ball probes: time-constant Neumann bumps of E-norm R added to h* and a*.
  Field bump(n);
  for (int j = 0; j < g.nodes_y(); ++j) {
    for (int i = 0; i < g.nodes_x(); ++i) {
      bump[g.index(i, j)] = std::cos(M_PI * g.x(i) / g.lx()) * std::cos(M_PI * g.y(j) / g.ly());
    }
  }
  State shape = State::zeros(v_star.grid);
  shape.h = bump;
  const double bump_E = std::pow(T, 1.0 / cfg.p) * x1_norm(pack(shape), v_star.grid, cfg.q);
  const double scale = cfg.R / bump_E;
  double min_h = h_star, max_h = h_star, min_a = a_star, max_a = a_star;
  for (double b : bump) {
    min_h = std::min(min_h, h_star - scale * std::abs(b));
    max_h = std::max(max_h, h_star + scale * std::abs(b));
    min_a = std::min(min_a, a_star - scale * std::abs(b));
    max_a = std::max(max_a, a_star + scale * std::abs(b));
  }
  rep.checks.push_back(make_check("P3.kappa_lower", ">", pp.kappa, 0.25 * cfg.c_s));
  rep.checks.push_back(make_check("P3.h_floor", ">=", min_h, pp.kappa));
  rep.checks.push_back(make_check("P3.a_floor", ">=", min_a, pp.kappa));
  rep.checks.push_back(make_check("P3.h_upper", "<", max_h, 4.0 * cfg.c_s));
  rep.checks.push_back(make_check("P3.a_upper", "<", max_a, 4.0 * cfg.c_s));

  const double forcing = fields_F_norm(g, T, n_t, cfg.p, cfg.q, [&](double t) {
    const VectorField gu = fs.velocity_forcing(t, pp, n);
    return std::vector<Field>{gu.x, gu.y, fs.g_h.at(t, n), fs.g_a.at(t, n)};
  });
  rep.checks.push_back(make_check("forcing", "<", forcing, quarter));
  return rep;
}

FixpointProblem::FixpointProblem(const State& v_star, const PhysParams& pp, const ForcingSpec& fs,
                                 const FixpointConfig& cfg)
    : v_star_(v_star), pp_(pp), fs_(fs), cfg_(cfg) {
  require_constant_star(v_star_);
  cfg_.validate();
  pp_.eps_shift = cfg_.eps_shift;
  pp_.validate();
  variant_ = cfg_.time_dependent_f ? RhsVariant::F_eps_p_t : RhsVariant::F_eps_p;
  A_star_ = assemble_A_eps(v_star_, cfg_.eps_shift, pp_);
  solver_ = std::make_shared<const PeriodicSolver>(A_star_.matrix, fs_.T, cfg_.n_t);
}

PeriodicTrajectory FixpointProblem::star() const {
  return PeriodicTrajectory::constant(pack(v_star_), cfg_.n_t, fs_.T, v_star_.grid);
}

double FixpointProblem::e_norm(const PeriodicTrajectory& v) const {
  return trajectory_norm(v, TrajectoryNorm::E_norm, cfg_.p, cfg_.q);
}

double FixpointProblem::f_norm(const PeriodicTrajectory& v) const {
  return trajectory_norm(v, TrajectoryNorm::F_norm, cfg_.p, cfg_.q);
}

void FixpointProblem::require_admissible(const PeriodicTrajectory& v, const std::string& where) const {
  for (int k = 0; k < v.n_t(); ++k) {
    v.state(k).require_admissible(pp_.kappa, where + " (snapshot " + std::to_string(k) + ")");
  }
}

PeriodicTrajectory FixpointProblem::rhs(const PeriodicTrajectory& v) const {
  PeriodicTrajectory out = v;
  parallel_for(out.snapshots.size(), [&](std::size_t k) {
    const State s = v.state(static_cast<long>(k));
    out.snapshots[k] = pack(assemble_rhs(s, v.time(static_cast<long>(k)), fs_, pp_, variant_));
  });
  return out;
}

PeriodicTrajectory FixpointProblem::phi(const PeriodicTrajectory& v) const {
  if (v.n_t() != cfg_.n_t || v.grid != v_star_.grid) {
    fail(ErrorKind::shape_mismatch, "phi: trajectory does not match the problem's grid or n_t");
  }
  require_admissible(v, "phi");
  PeriodicTrajectory g = v;
  parallel_for(g.snapshots.size(), [&](std::size_t k) {
    const State s = v.state(static_cast<long>(k));
    const Eigen::VectorXd& vk = v.snapshots[k];
    const SparseMatrix Ak = assemble_A_eps(s, cfg_.eps_shift, pp_).matrix;
    const Eigen::VectorXd F = pack(assemble_rhs(s, v.time(static_cast<long>(k)), fs_, pp_, variant_));
    g.snapshots[k] = F + A_star_.matrix * vk - Ak * vk;
  });
  return solver_->solve(g);
}

std::pair<double, double> FixpointProblem::residuals(const PeriodicTrajectory& v) const {
  const PeriodicTrajectory dv = spectral_derivative(v);
  const RhsVariant original = RhsVariant::F_p;
  PeriodicTrajectory r_eps = dv;
  PeriodicTrajectory r_orig = dv;
  parallel_for(v.snapshots.size(), [&](std::size_t k) {
    const State s = v.state(static_cast<long>(k));
    const double t = v.time(static_cast<long>(k));
    const Eigen::VectorXd& vk = v.snapshots[k];
    r_eps.snapshots[k] += assemble_A_eps(s, cfg_.eps_shift, pp_).matrix * vk -
                          pack(assemble_rhs(s, t, fs_, pp_, variant_));
    r_orig.snapshots[k] +=
        assemble_A_eps(s, 0.0, pp_).matrix * vk - pack(assemble_rhs(s, t, fs_, pp_, original));
  });
  return {f_norm(r_eps), f_norm(r_orig)};
}

PeriodicTrajectory FixpointProblem::random_ball_point(double radius, std::uint64_t seed) const {
  const GridPtr& gp = v_star_.grid;
  const Grid2D& g = *gp;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int n_t = cfg_.n_t;
  const double T = fs_.T;

  // coef[component][time fn][mode]
  double coef[4][3][4];
  for (auto& c : coef)
    for (auto& tf : c)
      for (double& m : tf) m = nd(rng);

  PeriodicTrajectory dv = PeriodicTrajectory::zeros(DofLayout::of(g).total(), n_t, T, gp);
  for (int k = 0; k < n_t; ++k) {
    const double t = T * k / n_t;
    const double tf[3] = {1.0, std::cos(2.0 * M_PI * t / T), std::sin(2.0 * M_PI * t / T)};
    State s = State::zeros(gp);
    for (int j = 0; j < g.nodes_y(); ++j) {
      for (int i = 0; i < g.nodes_x(); ++i) {
        const double x = g.x(i) / g.lx();
        const double y = g.y(j) / g.ly();
        const std::size_t node = g.index(i, j);
        for (int c = 0; c < 4; ++c) {
          double val = 0.0;
          for (int m = 0; m < 4; ++m) {
            const int mx = m % 2;
            const int my = m / 2;
            // Dirichlet sine modes for velocity, Neumann cosine modes for scalars.
            const double basis = c < 2 ? std::sin((mx + 1) * M_PI * x) * std::sin((my + 1) * M_PI * y)
                                       : std::cos(mx * M_PI * x) * std::cos(my * M_PI * y);
            double w = 0.0;
            for (int f = 0; f < 3; ++f) w += coef[c][f][m] * tf[f];
            val += w * basis;
          }
          if (c < 2 && g.on_boundary(i, j)) val = 0.0;
          (c == 0 ? s.u.x : c == 1 ? s.u.y : c == 2 ? s.h : s.a)[node] = val;
        }
      }
    }
    dv.snapshots[static_cast<std::size_t>(k)] = pack(s);
  }
  const double nrm = e_norm(dv);
  return star() + (radius / nrm) * dv;
}

PeriodicTrajectory phi_map(const PeriodicTrajectory& v, const State& v_star, const PhysParams& pp,
                           const ForcingSpec& fs, const FixpointConfig& cfg) {
  FixpointProblem problem(v_star, pp, fs, cfg);
  return problem.phi(v);
}

FixpointResult solve_periodic_quasilinear(const FixpointProblem& problem,
                                          std::optional<PeriodicTrajectory> initial) {
  const FixpointConfig& cfg = problem.config();
  const PeriodicTrajectory star = problem.star();
  PeriodicTrajectory v = initial ? std::move(*initial) : star;
  problem.require_admissible(v, "initial iterate");

  FixpointResult res;
  ConvergenceLog& log = res.log;
  double prev = 0.0;
  for (int n = 1; n <= cfg.max_iter; ++n) {
    PeriodicTrajectory w = problem.phi(v);
    IterationRecord rec;
    rec.iter = n;
    rec.increment = problem.e_norm(w - v);
    rec.ratio = n > 1 && prev > 0.0 ? rec.increment / prev : 0.0;
    rec.ball_distance = problem.e_norm(w - star);
    rec.min_h = std::numeric_limits<double>::infinity();
    rec.min_a = std::numeric_limits<double>::infinity();
    for (int k = 0; k < w.n_t(); ++k) {
      const State s = w.state(k);
      rec.min_h = std::min(rec.min_h, s.min_h());
      rec.min_a = std::min(rec.min_a, s.min_a());
    }
    log.iterations.push_back(rec);
    if (n > 1) log.contraction_factor = std::max(log.contraction_factor, rec.ratio);
    prev = rec.increment;

    if (!(rec.ball_distance <= cfg.R)) {
      std::ostringstream msg;
      msg << "iterate " << n << " left the ball: |v - v*|_E = " << rec.ball_distance
          << " > R = " << cfg.R;
      fail(ErrorKind::left_ball, msg.str());
    }
    problem.require_admissible(w, "iterate " + std::to_string(n));
    v = std::move(w);
    if (rec.increment < cfg.tol) {
      log.converged = true;
      break;
    }
  }
  if (!log.converged) {
    std::ostringstream msg;
    msg << "no convergence after " << cfg.max_iter << " iterations (last increment "
        << log.iterations.back().increment << ", tol " << cfg.tol << ")";
    fail(ErrorKind::no_convergence, msg.str());
  }
  std::tie(log.residual_eps, log.residual_original) = problem.residuals(v);
  log.trace_proxy = trace_proxy_norm(v - star, cfg.q);
  res.trajectory = std::move(v);
  return res;
}

FixpointResult solve_periodic_quasilinear(const FixpointConfig& cfg, const PhysParams& pp,
                                          const ForcingSpec& fs, const State& v_star) {
  FixpointProblem problem(v_star, pp, fs, cfg);
  return solve_periodic_quasilinear(problem);
}

double contraction_ratio(const FixpointProblem& problem, const PeriodicTrajectory& v1,
                         const PeriodicTrajectory& v2) {
  const double d = problem.e_norm(v1 - v2);
  if (!(d > 0.0)) fail(ErrorKind::degenerate_pair, "contraction probe needs v1 != v2");
  return problem.e_norm(problem.phi(v1) - problem.phi(v2)) / d;
}

double estimate_contraction(const FixpointProblem& problem, int n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) fail(ErrorKind::invalid_probe_count, "n_pairs must be at least 1");
  const double R = problem.config().R;
  double worst = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> ur(0.1, 1.0);
    const double r1 = ur(rng) * R;
    const double r2 = ur(rng) * R;
    const PeriodicTrajectory v1 = problem.random_ball_point(r1, rng());
    const PeriodicTrajectory v2 = problem.random_ball_point(r2, rng());
    worst = std::max(worst, contraction_ratio(problem, v1, v2));
  }
  return worst;
}

double estimate_rhs_lipschitz(const FixpointProblem& problem, double R, int n_pairs,
                              std::uint64_t seed) {
  if (n_pairs < 1) fail(ErrorKind::invalid_probe_count, "n_pairs must be at least 1");
  double worst = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> ur(0.1, 1.0);
    const PeriodicTrajectory v1 = problem.random_ball_point(ur(rng) * R, rng());
    const PeriodicTrajectory v2 = problem.random_ball_point(ur(rng) * R, rng());
    const double d = problem.e_norm(v1 - v2);
    if (!(d > 0.0)) fail(ErrorKind::degenerate_pair, "Lipschitz probe drew coinciding states");
    worst = std::max(worst, problem.f_norm(problem.rhs(v1) - problem.rhs(v2)) / d);
  }
  return worst;
}

double estimate_operator_lipschitz(const FixpointProblem& problem, double R, int n_pairs,
                                   std::uint64_t seed) {
  if (n_pairs < 1) fail(ErrorKind::invalid_probe_count, "n_pairs must be at least 1");
  const PhysParams& pp = problem.physics();
  const double eps = problem.config().eps_shift;
  const PeriodicTrajectory star = problem.star();
  double worst = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> ur(0.1, 1.0);
    const PeriodicTrajectory v1 = problem.random_ball_point(ur(rng) * R, rng());
    const PeriodicTrajectory v2 = problem.random_ball_point(ur(rng) * R, rng());
    const PeriodicTrajectory w = problem.random_ball_point(1.0, rng()) - star;
    const double d = problem.e_norm(v1 - v2);
    if (!(d > 0.0)) fail(ErrorKind::degenerate_pair, "Lipschitz probe drew coinciding states");
    PeriodicTrajectory diff = w;
    parallel_for(diff.snapshots.size(), [&](std::size_t k) {
      const SparseMatrix A1 = assemble_A_eps(v1.state(static_cast<long>(k)), eps, pp).matrix;
      const SparseMatrix A2 = assemble_A_eps(v2.state(static_cast<long>(k)), eps, pp).matrix;
      diff.snapshots[k] = A1 * w.snapshots[k] - A2 * w.snapshots[k];
    });
    worst = std::max(worst, problem.f_norm(diff) / (d * problem.e_norm(w)));
  }
  return worst;
}

std::vector<std::pair<double, double>> tabulate_L(const FixpointProblem& problem,
                                                  const std::vector<double>& radii, int n_pairs,
                                                  std::uint64_t seed) {
  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end());
  std::vector<std::pair<double, double>> table;
  double running = 0.0;
  for (double r : rs) {
    running = std::max(running, estimate_operator_lipschitz(problem, r, n_pairs, seed));
    table.emplace_back(r, running);
  }
  return table;
}

ParameterChoice select_parameters(double M, double C, double C_k,
                                  const std::vector<std::pair<double, double>>& L_of_R, double R0,
                                  double cf_over_cs) {
  if (!(M > 0.0) || !(C > 0.0)) fail(ErrorKind::invalid_argument, "M and C must be positive");
  if (L_of_R.empty()) fail(ErrorKind::empty_feasible_set, "L(R) table is empty");
  std::vector<std::pair<double, double>> table = L_of_R;
  std::sort(table.begin(), table.end());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i].first > 0.0) || !(table[i].second > 0.0)) {
      fail(ErrorKind::invalid_argument, "L(R) table entries must be positive");
    }
    if (i > 0 && table[i].second < table[i - 1].second) {
      fail(ErrorKind::invalid_argument, "L(R) must be non-decreasing in R");
    }
  }

  ParameterChoice out;
  out.ck_bound = 1.0 / (4.0 * M * C);
  out.ck_ok = C_k <= out.ck_bound;
  const double c = C / (1.0 + cf_over_cs);
  out.eps_bound = 1.0 / (12.0 * M * c);

  // Scan (R_{i-1}, R_i] from the top; L is taken as L_i on that interval.
  for (std::size_t i = table.size(); i-- > 0;) {
    const double lower = i == 0 ? 0.0 : table[i - 1].first;
    const double cap = std::min({table[i].first, R0, 1.0 / (4.0 * M * C),
                                 1.0 / (8.0 * M * table[i].second)});
    if (cap > lower) {
      out.R = cap;
      out.delta_small = cap / (4.0 * M);
      return out;
    }
  }
  fail(ErrorKind::empty_feasible_set, "no tabulated radius satisfies the ball conditions");
}

double shape_C(double c, double c_f, double c_s) { return c * (1.0 + c_f / c_s); }

double shape_Ck(double eps, double c_f, double c_s) {
  return (eps + c_s + (1.0 + 1.0 / c_s) * c_f) / (1.0 + c_f / c_s);
}

}  // namespace hibler
