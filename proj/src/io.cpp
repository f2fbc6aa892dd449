#include "hibler/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hibler/operators.hpp"

namespace hibler {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

bool to_number(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(format_double(x)); }

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_state_csv(const std::filesystem::path& path, const State& s) {
  s.check_shape();
  const Grid2D& g = *s.grid;
  std::ofstream out = open_out(path);
  out << "x,y,u1,u2,h,a\n";
  for (int j = 0; j < g.nodes_y(); ++j) {
    for (int i = 0; i < g.nodes_x(); ++i) {
      const std::size_t n = g.index(i, j);
      out << format_double(g.x(i)) << ',' << format_double(g.y(j)) << ',' << format_double(s.u.x[n]) << ','
          << format_double(s.u.y[n]) << ',' << format_double(s.h[n]) << ',' << format_double(s.a[n]) << '\n';
    }
  }
  if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

State read_state_csv(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read '" + path.string() + "'");
  State s = State::zeros(grid);
  std::string line;
  std::getline(in, line);
  if (line.rfind("x,y,u1,u2,h,a", 0) != 0) fail(ErrorKind::io, path.string() + ": unexpected header");
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    double vals[6];
    if (cells.size() != 6 || n >= grid->node_count()) fail(ErrorKind::io, path.string() + ": malformed row");
    for (int c = 0; c < 6; ++c) {
      if (!to_number(cells[c], vals[c])) fail(ErrorKind::io, path.string() + ": non-numeric cell");
    }
    s.u.x[n] = vals[2];
    s.u.y[n] = vals[3];
    s.h[n] = vals[4];
    s.a[n] = vals[5];
    ++n;
  }
  if (n != grid->node_count()) fail(ErrorKind::io, path.string() + ": wrong number of rows");
  return s;
}

void write_trajectory(const std::filesystem::path& dir, const PeriodicTrajectory& traj, const std::string& prefix) {
  if (!traj.grid) fail(ErrorKind::invalid_argument, "trajectory dump needs a grid");
  std::filesystem::create_directories(dir);
  std::ofstream index = open_out(dir / "index.csv");
  index << "k,t,file\n";
  for (int k = 0; k < traj.n_t(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04d.csv", prefix.c_str(), k);
    write_state_csv(dir / name, traj.state(k));
    index << k << ',' << format_double(traj.time(k)) << ',' << name << '\n';
  }
}

PeriodicSignal read_forcing_csv(const std::filesystem::path& path, const Grid2D& g, int n_t, double T,
                                Profile profile) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read forcing file '" + path.string() + "'");
  const Field shape = make_profile(profile, g);
  PeriodicSignal sig;
  sig.period = T;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size() && numeric; ++c) numeric = to_number(cells[c], row[c]);
    if (!numeric) {
      if (lineno == 1) continue;
      fail(ErrorKind::io, path.string() + ": non-numeric value on line " + std::to_string(lineno));
    }
    if (row.size() == 1) {
      Field f(shape);
      for (double& x : f) x *= row[0];
      sig.samples.push_back(std::move(f));
    } else if (row.size() == g.node_count()) {
      sig.samples.emplace_back(row.begin(), row.end());
    } else {
      fail(ErrorKind::io, path.string() + ": line " + std::to_string(lineno) + " has " +
                              std::to_string(row.size()) + " columns, expected 1 or " +
                              std::to_string(g.node_count()));
    }
  }
  if (sig.n_t() != n_t) {
    fail(ErrorKind::io, path.string() + ": expected " + std::to_string(n_t) + " rows, found " +
                            std::to_string(sig.n_t()));
  }
  return sig;
}

Json to_json(const ConvergenceLog& log) {
  Json j;
  j["converged"] = log.converged;
  j["iterations"] = log.iterations.size();
  j["contraction_factor"] = number(log.contraction_factor);
  j["residual_eps"] = number(log.residual_eps);
  j["residual_original"] = number(log.residual_original);
  j["trace_proxy"] = number(log.trace_proxy);
  Json rows = Json::array();
  for (const auto& r : log.iterations) {
    rows.push_back({{"iter", r.iter},
                    {"increment", number(r.increment)},
                    {"ratio", number(r.ratio)},
                    {"ball_distance", number(r.ball_distance)},
                    {"min_h", number(r.min_h)},
                    {"min_a", number(r.min_a)}});
  }
  j["history"] = rows;
  j["warnings"] = log.warnings;
  return j;
}

Json to_json(const AssumptionReport& report) {
  Json j;
  j["all_pass"] = report.all_pass();
  Json rows = Json::array();
  for (const auto& c : report.checks) {
    rows.push_back({{"name", c.name},
                    {"relation", c.relation},
                    {"value", number(c.value)},
                    {"threshold", number(c.threshold)},
                    {"pass", c.pass}});
  }
  j["checks"] = rows;
  return j;
}

Json error_json(const std::exception& e) {
  Json j;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["kind"] = std::string(to_string(err->kind()));
    j["exit_code"] = is_solver_failure(err->kind()) ? 1 : 2;
    if (const auto* res = dynamic_cast<const ResonanceError*>(&e)) j["modes"] = res->modes();
  } else {
    j["kind"] = "internal";
    j["exit_code"] = 1;
  }
  j["message"] = e.what();
  return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

}  // namespace hibler
