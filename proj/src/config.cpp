#include "hibler/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hibler/errors.hpp"
#include "hibler/io.hpp"

namespace hibler {

namespace {

enum class Kind { real, integer, boolean, text };

struct KeySpec {
  const char* name;
  Kind kind;
  const char* value;
};

// Canonical key order; the manifest follows it.
const KeySpec kKeys[] = {
    {"grid.nx", Kind::integer, "16"},
    {"grid.ny", Kind::integer, "16"},
    {"grid.lx", Kind::real, "1"},
    {"grid.ly", Kind::real, "1"},

    {"physics.rho_ice", Kind::real, "1"},
    {"physics.c_cor", Kind::real, "0.1"},
    {"physics.g_grav", Kind::real, "1"},
    {"physics.d_h", Kind::real, "1"},
    {"physics.d_a", Kind::real, "1"},
    {"physics.kappa", Kind::real, "0.5"},
    {"physics.c1", Kind::real, "0"},
    {"physics.c2", Kind::real, "0"},
    {"physics.h_star", Kind::real, "1"},
    {"physics.a_star", Kind::real, "1"},

    {"rheology.e", Kind::real, "2"},
    {"rheology.delta", Kind::real, "1e-06"},
    {"rheology.pstar", Kind::real, "1"},
    {"rheology.c_press", Kind::real, "20"},

    {"forcing.T", Kind::real, "1"},
    {"forcing.g_u1_amp", Kind::real, "0"},
    {"forcing.g_u2_amp", Kind::real, "0"},
    {"forcing.g_u_profile", Kind::text, "gaussian_bump"},
    {"forcing.g_u1_file", Kind::text, ""},
    {"forcing.g_u2_file", Kind::text, ""},
    {"forcing.g_h_amp", Kind::real, "0"},
    {"forcing.g_h_profile", Kind::text, "gaussian_bump"},
    {"forcing.g_h_phase", Kind::real, "0"},
    {"forcing.g_h_file", Kind::text, ""},
    {"forcing.g_a_amp", Kind::real, "0"},
    {"forcing.g_a_profile", Kind::text, "gaussian_bump"},
    {"forcing.g_a_phase", Kind::real, "0"},
    {"forcing.g_a_file", Kind::text, ""},
    {"forcing.grad_H_x", Kind::real, "0"},
    {"forcing.grad_H_y", Kind::real, "0"},
    {"forcing.U_atm_x", Kind::real, "0"},
    {"forcing.U_atm_y", Kind::real, "0"},
    {"forcing.U_ocean_x", Kind::real, "0"},
    {"forcing.U_ocean_y", Kind::real, "0"},
    {"forcing.wind_mode", Kind::text, "analytic_gu"},
    {"forcing.wind_c_x_amp", Kind::real, "0"},
    {"forcing.wind_c_y_amp", Kind::real, "0"},
    {"forcing.wind_c_profile", Kind::text, "constant"},
    {"forcing.f_shape", Kind::text, "zero"},
    {"forcing.f0", Kind::real, "0"},
    {"forcing.f1", Kind::real, "0"},
    {"forcing.x_ref", Kind::real, "0"},
    {"forcing.f_time_amp", Kind::real, "0"},
    {"forcing.f_time_dependent", Kind::boolean, "false"},

    {"solver.n_t", Kind::integer, "32"},
    {"solver.R", Kind::real, "0.01"},
    {"solver.delta_small", Kind::real, "0.0025"},
    {"solver.eps_shift", Kind::real, "1"},
    {"solver.c_s", Kind::real, "1"},
    {"solver.c_f", Kind::real, "2"},
    {"solver.tol", Kind::real, "1e-09"},
    {"solver.max_iter", Kind::integer, "50"},
    {"solver.p", Kind::real, "5"},
    {"solver.q", Kind::real, "5"},
    {"solver.force", Kind::boolean, "false"},
    {"solver.dt", Kind::real, "0.00390625"},
    {"solver.scheme", Kind::text, "imex_cn"},
    {"solver.tol_shoot", Kind::real, "1e-08"},
    {"solver.theta", Kind::real, "1"},
    {"solver.max_shoot_iter", Kind::integer, "200"},
    {"solver.n_pairs", Kind::integer, "4"},
    {"solver.restarts", Kind::integer, "5"},
};

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : kKeys) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  fail(ErrorKind::config, where.empty() ? what : where + ": " + what);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_long(const std::string& s, long& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    out = false;
    return true;
  }
  return false;
}

void type_check(const KeySpec& k, const std::string& value, const std::string& where) {
  double d;
  long l;
  bool b;
  switch (k.kind) {
    case Kind::real:
      if (!parse_double(value, d)) config_error(where, std::string(k.name) + " expects a number, got '" + value + "'");
      break;
    case Kind::integer:
      if (!parse_long(value, l)) config_error(where, std::string(k.name) + " expects an integer, got '" + value + "'");
      break;
    case Kind::boolean:
      if (!parse_bool(value, b)) config_error(where, std::string(k.name) + " expects true/false, got '" + value + "'");
      break;
    case Kind::text:
      break;
  }
}

class Values {
 public:
  Values() {
    for (const auto& k : kKeys) values_[k.name] = k.value;
  }

  void set(const std::string& key, const std::string& value, const std::string& where) {
    const KeySpec* k = find_key(key);
    if (!k) config_error(where, "unknown key '" + key + "'");
    type_check(*k, value, where);
    values_[key] = value;
  }

  double real(const std::string& key) const {
    double d = 0.0;
    parse_double(values_.at(key), d);
    return d;
  }
  int integer(const std::string& key) const {
    long l = 0;
    parse_long(values_.at(key), l);
    return static_cast<int>(l);
  }
  bool boolean(const std::string& key) const {
    bool b = false;
    parse_bool(values_.at(key), b);
    return b;
  }
  const std::string& text(const std::string& key) const { return values_.at(key); }

  std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : kKeys) out.emplace_back(k.name, values_.at(k.name));
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
};

PeriodicSignal make_signal(const Values& v, const std::string& file_key, double amp, Profile profile,
                           double phase, const Grid2D& g, int n_t, double T,
                           const std::filesystem::path& base_dir) {
  const std::string& file = v.text(file_key);
  if (!file.empty()) {
    std::filesystem::path path(file);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return read_forcing_csv(path, g, n_t, T, profile);
  }
  if (amp == 0.0) return {};
  return PeriodicSignal::sinusoid(amp, make_profile(profile, g), n_t, T, phase);
}

PeriodicSignal constant_signal(double value, const Grid2D& g, int n_t, double T) {
  if (value == 0.0) return {};
  return PeriodicSignal::constant(Field(g.node_count(), value), n_t, T);
}

Profile profile_of(const Values& v, const std::string& key) {
  try {
    return parse_profile(v.text(key));
  } catch (const Error& e) {
    config_error("", key + ": " + e.what());
  }
}

GrowthShape shape_of(const std::string& s) {
  if (s == "zero") return GrowthShape::zero;
  if (s == "constant") return GrowthShape::constant;
  if (s == "linear") return GrowthShape::linear;
  if (s == "tanh") return GrowthShape::tanh;
  config_error("", "forcing.f_shape must be zero, constant, linear or tanh, got '" + s + "'");
}

ParsedConfig materialize(const Values& v, const std::filesystem::path& base_dir) {
  ParsedConfig c;
  c.resolved = v.resolved();

  c.grid_spec = {v.integer("grid.nx"), v.integer("grid.ny"), v.real("grid.lx"), v.real("grid.ly")};
  try {
    c.grid = make_grid(c.grid_spec.nx, c.grid_spec.ny, c.grid_spec.lx, c.grid_spec.ly);
  } catch (const Error& e) {
    config_error("", std::string("grid: ") + e.what());
  }
  const Grid2D& g = *c.grid;

  PhysParams& pp = c.physics;
  pp.rho_ice = v.real("physics.rho_ice");
  pp.c_cor = v.real("physics.c_cor");
  pp.g_grav = v.real("physics.g_grav");
  pp.d_h = v.real("physics.d_h");
  pp.d_a = v.real("physics.d_a");
  pp.kappa = v.real("physics.kappa");
  pp.c1 = v.real("physics.c1");
  pp.c2 = v.real("physics.c2");
  pp.rheology.e = v.real("rheology.e");
  pp.rheology.delta = v.real("rheology.delta");
  pp.rheology.pstar = v.real("rheology.pstar");
  pp.rheology.c_press = v.real("rheology.c_press");
  c.h_star = v.real("physics.h_star");
  c.a_star = v.real("physics.a_star");

  FixpointConfig& fc = c.fixpoint;
  fc.n_t = v.integer("solver.n_t");
  fc.R = v.real("solver.R");
  fc.delta_small = v.real("solver.delta_small");
  fc.eps_shift = v.real("solver.eps_shift");
  fc.c_s = v.real("solver.c_s");
  fc.c_f = v.real("solver.c_f");
  fc.tol = v.real("solver.tol");
  fc.max_iter = v.integer("solver.max_iter");
  fc.p = v.real("solver.p");
  fc.q = v.real("solver.q");
  fc.force = v.boolean("solver.force");
  fc.time_dependent_f = v.boolean("forcing.f_time_dependent");
  pp.eps_shift = fc.eps_shift;

  try {
    pp.validate();
    fc.validate();
  } catch (const Error& e) {
    config_error("", e.what());
  }
  if (!(c.h_star > 0.0) || !(c.a_star > 0.0)) config_error("", "physics.h_star and physics.a_star must be positive");

  c.ivp.dt = v.real("solver.dt");
  const std::string& scheme = v.text("solver.scheme");
  if (scheme == "imex_euler") c.ivp.scheme = Scheme::imex_euler;
  else if (scheme == "imex_cn") c.ivp.scheme = Scheme::imex_cn;
  else config_error("", "solver.scheme must be imex_euler or imex_cn, got '" + scheme + "'");
  c.shooting.tol = v.real("solver.tol_shoot");
  c.shooting.theta = v.real("solver.theta");
  c.shooting.max_iter = v.integer("solver.max_shoot_iter");
  if (!(c.ivp.dt > 0.0)) config_error("", "solver.dt must be positive");
  if (!(c.shooting.tol > 0.0)) config_error("", "solver.tol_shoot must be positive");
  if (!(c.shooting.theta > 0.0 && c.shooting.theta <= 1.0)) config_error("", "solver.theta must lie in (0, 1]");
  c.n_pairs = v.integer("solver.n_pairs");
  c.restarts = v.integer("solver.restarts");
  if (c.n_pairs < 1) config_error("", "solver.n_pairs must be at least 1");
  if (c.restarts < 0) config_error("", "solver.restarts must be non-negative");

  ForcingSpec& fs = c.forcing;
  fs.T = v.real("forcing.T");
  if (!(fs.T > 0.0)) config_error("", "forcing.T must be positive");
  fs.n_t = fc.n_t;
  const int n_t = fs.n_t;
  const double T = fs.T;
  const Profile pu = profile_of(v, "forcing.g_u_profile");
  fs.g_u.x = make_signal(v, "forcing.g_u1_file", v.real("forcing.g_u1_amp"), pu, 0.0, g, n_t, T, base_dir);
  fs.g_u.y = make_signal(v, "forcing.g_u2_file", v.real("forcing.g_u2_amp"), pu, 0.0, g, n_t, T, base_dir);
  fs.g_h = make_signal(v, "forcing.g_h_file", v.real("forcing.g_h_amp"), profile_of(v, "forcing.g_h_profile"),
                       v.real("forcing.g_h_phase"), g, n_t, T, base_dir);
  fs.g_a = make_signal(v, "forcing.g_a_file", v.real("forcing.g_a_amp"), profile_of(v, "forcing.g_a_profile"),
                       v.real("forcing.g_a_phase"), g, n_t, T, base_dir);
  fs.grad_H.x = constant_signal(v.real("forcing.grad_H_x"), g, n_t, T);
  fs.grad_H.y = constant_signal(v.real("forcing.grad_H_y"), g, n_t, T);
  fs.U_atm.x = constant_signal(v.real("forcing.U_atm_x"), g, n_t, T);
  fs.U_atm.y = constant_signal(v.real("forcing.U_atm_y"), g, n_t, T);
  fs.U_ocean.x = constant_signal(v.real("forcing.U_ocean_x"), g, n_t, T);
  fs.U_ocean.y = constant_signal(v.real("forcing.U_ocean_y"), g, n_t, T);

  const std::string& wm = v.text("forcing.wind_mode");
  if (wm == "analytic_gu") fs.wind_mode = WindMode::analytic_gu;
  else if (wm == "wind_shape") fs.wind_mode = WindMode::wind_shape;
  else config_error("", "forcing.wind_mode must be analytic_gu or wind_shape, got '" + wm + "'");
  const Profile pc = profile_of(v, "forcing.wind_c_profile");
  const double cx = v.real("forcing.wind_c_x_amp");
  const double cy = v.real("forcing.wind_c_y_amp");
  if (cx != 0.0) fs.wind_c.x = PeriodicSignal::sinusoid(cx, make_profile(pc, g), n_t, T);
  if (cy != 0.0) fs.wind_c.y = PeriodicSignal::sinusoid(cy, make_profile(pc, g), n_t, T);

  GrowthRate& f = fs.f;
  f.shape = shape_of(v.text("forcing.f_shape"));
  f.f0 = v.real("forcing.f0");
  f.f1 = v.real("forcing.f1");
  f.x_ref = v.real("forcing.x_ref");
  f.time_amp = v.real("forcing.f_time_amp");
  f.period = T;
  // Shooting integrates the unshifted system; it only sees the stationary
  // growth rate when the spectral solver does.
  c.ivp.variant = (fc.time_dependent_f || f.time_amp == 0.0) ? RhsVariant::F_p : RhsVariant::F_eps_p;
  return c;
}

std::pair<std::string, std::string> split_override(const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos) config_error("--set " + item, "expected section.key=value");
  std::string key = trim(item.substr(0, eq));
  std::string value = trim(item.substr(eq + 1));
  if (key.find('.') == std::string::npos) config_error("--set " + item, "key must be section.key");
  return {key, value};
}

}  // namespace

RunMode parse_mode(const std::string& name) {
  if (name == "simulate-periodic") return RunMode::simulate_periodic;
  if (name == "validate-shooting") return RunMode::validate_shooting;
  if (name == "check-assumptions") return RunMode::check_assumptions;
  if (name == "diagnose-operator") return RunMode::diagnose_operator;
  if (name == "estimate-constants") return RunMode::estimate_constants;
  fail(ErrorKind::config, "unknown mode '" + name + "'");
}

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::simulate_periodic: return "simulate-periodic";
    case RunMode::validate_shooting: return "validate-shooting";
    case RunMode::check_assumptions: return "check-assumptions";
    case RunMode::diagnose_operator: return "diagnose-operator";
    case RunMode::estimate_constants: return "estimate-constants";
  }
  return "unknown";
}

std::vector<std::pair<std::string, std::string>> default_config_values() { return Values().resolved(); }

ParsedConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides,
                               const std::filesystem::path& base_dir) {
  Values values;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "grid" && section != "physics" && section != "rheology" && section != "forcing" &&
          section != "solver") {
        config_error(where, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(where, "expected key = value");
    if (section.empty()) config_error(where, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error(where, "empty key");
    values.set(section + "." + key, value, where);
  }
  for (const auto& item : overrides) {
    auto [key, value] = split_override(item);
    values.set(key, value, "--set " + item);
  }
  ParsedConfig c = materialize(values, base_dir);
  c.run.overrides = overrides;
  return c;
}

ParsedConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  ParsedConfig c = parse_config_text(ss.str(), overrides, path.parent_path());
  c.run.config_path = path;
  return c;
}

}  // namespace hibler
