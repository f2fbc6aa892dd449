// hibler: periodic sea-ice solver front end.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hibler/config.hpp"
#include "hibler/errors.hpp"
#include "hibler/fixpoint.hpp"
#include "hibler/io.hpp"
#include "hibler/operators.hpp"
#include "hibler/periodic_linear.hpp"
#include "hibler/timemarch.hpp"

namespace fs = std::filesystem;
using namespace hibler;

namespace {

Json manifest(const ParsedConfig& c) {
  Json j;
  j["mode"] = to_string(c.run.mode);
  j["config"] = c.run.config_path.string();
  j["out"] = c.run.out_dir.string();
  j["seed"] = c.run.seed;
  j["overrides"] = c.run.overrides;
  Json resolved;
  for (const auto& [k, v] : c.resolved) resolved[k] = v;
  j["resolved"] = resolved;
  return j;
}

Json monodromy_json(const MonodromyReport& r) {
  Json j;
  j["period"] = r.period;
  j["norm1"] = r.norm1;
  j["threshold"] = r.threshold;
  j["pass"] = r.pass;
  j["failing"] = r.failing;
  Json modes = Json::array();
  for (const auto& m : r.modes) modes.push_back({{"k", m.k}, {"sigma_min", m.sigma_min}, {"pass", m.pass}});
  j["modes"] = modes;
  return j;
}

// Runs the assumption gate; returns false when the run must stop with exit 2.
bool gate(const ParsedConfig& c, const fs::path& out, AssumptionReport& report) {
  report = check_assumptions(c.v_star(), c.physics, c.forcing, c.fixpoint, c.fixpoint.time_dependent_f);
  write_json(out / "assumption_report.json", to_json(report));
  if (report.all_pass() || c.fixpoint.force) return true;
  std::string failed;
  for (const auto& ch : report.checks) {
    if (!ch.pass) failed += (failed.empty() ? "" : ", ") + ch.name;
  }
  Error err(ErrorKind::assumption_failure, "assumptions violated: " + failed);
  write_json(out / "error.json", error_json(err));
  std::cerr << "hibler: " << err.what() << " (set solver.force=true to run anyway)\n";
  return false;
}

FixpointResult run_fixpoint(const fs::path& out, const FixpointProblem& problem) {
  FixpointResult res = solve_periodic_quasilinear(problem);
  write_json(out / "convergence_log.json", to_json(res.log));
  write_trajectory(out / "trajectory", res.trajectory);
  std::printf("converged in %zu iterations, contraction factor %.4g, residual %.3g\n",
              res.log.iterations.size(), res.log.contraction_factor, res.log.residual_original);
  return res;
}

int simulate(const ParsedConfig& c, const fs::path& out) {
  AssumptionReport report;
  if (!gate(c, out, report)) return 2;
  FixpointProblem problem(c.v_star(), c.physics, c.forcing, c.fixpoint);
  run_fixpoint(out, problem);
  return 0;
}

int validate_shooting(const ParsedConfig& c, const fs::path& out) {
  AssumptionReport report;
  if (!gate(c, out, report)) return 2;
  FixpointProblem problem(c.v_star(), c.physics, c.forcing, c.fixpoint);
  const FixpointResult spec = run_fixpoint(out, problem);

  const State start = c.v_star();
  const ShootingResult sh = shooting_fixed_point(start, c.forcing.T, c.ivp, c.physics, c.forcing, c.shooting);
  HiblerSystem sys(c.grid, c.physics, c.forcing, c.ivp.variant);
  const IvpResult orbit = integrate_period(sys, sh.v0, c.forcing.T, c.ivp, c.fixpoint.n_t);
  PeriodicTrajectory shoot = resample(orbit.trajectory, c.forcing.T, c.fixpoint.n_t);
  write_trajectory(out / "shooting", shoot);
  const CrossValidation cv = cross_validate(spec.trajectory, orbit.trajectory, c.fixpoint.p, c.fixpoint.q,
                                            problem.star());
  Json j;
  j["shooting_iterations"] = sh.iterations;
  j["shooting_residual"] = sh.residual;
  j["theta_final"] = sh.theta_final;
  j["dt_used"] = orbit.dt_used;
  j["dt_adjusted"] = orbit.dt_adjusted;
  j["abs_F"] = cv.abs_F;
  j["rel_F"] = cv.rel_F;
  j["rel_F_deviation"] = cv.rel_F_deviation;
  j["sup_u1"] = cv.sup_u1;
  j["sup_u2"] = cv.sup_u2;
  j["sup_h"] = cv.sup_h;
  j["sup_a"] = cv.sup_a;
  write_json(out / "cross_validation.json", j);
  std::printf("shooting: %d iterations, relative F discrepancy %.3g\n", sh.iterations, cv.rel_F);
  return 0;
}

int check(const ParsedConfig& c, const fs::path& out) {
  AssumptionReport report;
  const bool ok = gate(c, out, report);
  for (const auto& ch : report.checks) {
    std::printf("%-22s %-5s %.6g %s %.6g\n", ch.name.c_str(), ch.pass ? "ok" : "FAIL", ch.value,
                ch.relation.c_str(), ch.threshold);
  }
  return ok && report.all_pass() ? 0 : 2;
}

int diagnose(const ParsedConfig& c, const fs::path& out) {
  const State vs = c.v_star();
  const int modes = c.fixpoint.n_t / 2;
  const DiscreteOperator A0 = assemble_A_eps(vs, 0.0, c.physics);
  const DiscreteOperator Ae = assemble_A_eps(vs, c.fixpoint.eps_shift, c.physics);
  const MonodromyReport r0 = monodromy_invertibility_check(A0.matrix, c.forcing.T, modes, false);
  const MonodromyReport re = monodromy_invertibility_check(Ae.matrix, c.forcing.T, modes, false);
  Json j;
  j["dofs"] = Ae.rows();
  j["nonzeros"] = Ae.matrix.nonZeros();
  j["unshifted"] = monodromy_json(r0);
  j["shifted"] = monodromy_json(re);
  write_json(out / "operator_report.json", j);
  std::ofstream trip(out / "operator_triplets.txt");
  write_triplets(trip, Ae.matrix);
  std::printf("unshifted: %s (%zu failing modes), shifted eps=%g: %s\n", r0.pass ? "pass" : "fail",
              r0.failing.size(), c.fixpoint.eps_shift, re.pass ? "pass" : "fail");
  if (!re.pass) {
    ResonanceError err(re.failing, "shifted operator is resonant");
    write_json(out / "error.json", error_json(err));
    return 1;
  }
  return 0;
}

int estimate(const ParsedConfig& c, const fs::path& out) {
  const State vs = c.v_star();
  FixpointProblem problem(vs, c.physics, c.forcing, c.fixpoint);
  const FixpointConfig& fc = c.fixpoint;
  const std::uint64_t seed = c.run.seed;
  const DiscreteOperator Ae = assemble_A_eps(vs, fc.eps_shift, c.physics);
  const double M = estimate_maxreg_constant(Ae, c.forcing.T, c.n_pairs, fc.n_t, seed, fc.p, fc.q);
  const double lip_F = estimate_rhs_lipschitz(problem, fc.R, c.n_pairs, seed + 1);
  const std::vector<double> radii = {fc.R / 4.0, fc.R / 2.0, fc.R};
  const auto table = tabulate_L(problem, radii, c.n_pairs, seed + 2);
  const double kappa = estimate_contraction(problem, c.n_pairs, seed + 3);
  const double C = shape_C(lip_F, fc.c_f, fc.c_s);
  const double Ck = shape_Ck(fc.eps_shift, fc.c_f, fc.c_s);
  const ParameterChoice pc = select_parameters(M, C, Ck, table, fc.R, fc.c_f / fc.c_s);

  Json j;
  j["M"] = M;
  j["rhs_lipschitz"] = lip_F;
  j["C"] = C;
  j["C_k"] = Ck;
  Json rows = Json::array();
  for (const auto& [r, l] : table) rows.push_back({{"R", r}, {"L", l}});
  j["L_table"] = rows;
  j["contraction_estimate"] = kappa;
  j["selected"] = {{"R", pc.R},
                   {"delta", pc.delta_small},
                   {"eps_bound", pc.eps_bound},
                   {"ck_bound", pc.ck_bound},
                   {"ck_ok", pc.ck_ok}};
  write_json(out / "constants.json", j);
  std::printf("M = %.4g, C = %.4g, L(R) = %.4g, contraction = %.4g, R = %.4g, delta = %.4g\n", M, C,
              table.back().second, kappa, pc.R, pc.delta_small);
  return 0;
}

int dispatch(const ParsedConfig& c) {
  const fs::path& out = c.run.out_dir;
  switch (c.run.mode) {
    case RunMode::simulate_periodic: return simulate(c, out);
    case RunMode::validate_shooting: return validate_shooting(c, out);
    case RunMode::check_assumptions: return check(c, out);
    case RunMode::diagnose_operator: return diagnose(c, out);
    case RunMode::estimate_constants: return estimate(c, out);
  }
  return 2;
}

int report_failure(const std::exception& e, const fs::path& out) {
  const Json j = error_json(e);
  try {
    fs::create_directories(out);
    write_json(out / "error.json", j);
  } catch (const std::exception&) {
  }
  std::cerr << "hibler: " << e.what() << '\n';
  return j["exit_code"].get<int>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-periodic sea-ice solver"};
  std::string mode;
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 1;
  std::vector<std::string> sets;
  app.add_option("mode", mode, "simulate-periodic | validate-shooting | check-assumptions | "
                               "diagnose-operator | estimate-constants")
      ->required();
  app.add_option("--config", config, "INI configuration file")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "seed for all random probes");
  app.add_option("--set", sets, "override, section.key=value")->take_all();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  ParsedConfig cfg;
  try {
    cfg = parse_config(config, sets);
    cfg.run.mode = parse_mode(mode);
    cfg.run.out_dir = out;
    cfg.run.seed = seed;
    fs::create_directories(out);
    write_json(fs::path(out) / "manifest.json", manifest(cfg));
  } catch (const std::exception& e) {
    return report_failure(e, out);
  }
  try {
    return dispatch(cfg);
  } catch (const std::exception& e) {
    return report_failure(e, out);
  }
}
