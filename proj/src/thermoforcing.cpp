#include "hibler/thermoforcing.hpp"

#include <cmath>
#include <limits>

#include "hibler/errors.hpp"

namespace hibler {

void PhysParams::validate() const {
  if (!(rho_ice > 0.0)) fail(ErrorKind::config, "physics: rho_ice must be positive");
  if (!(kappa > 0.0)) fail(ErrorKind::config, "physics: kappa must be positive");
  if (!(d_h > 0.0) || !(d_a > 0.0)) fail(ErrorKind::config, "physics: d_h and d_a must be positive");
  if (!(eps_shift >= 0.0)) fail(ErrorKind::config, "physics: eps_shift must be nonnegative");
  if (!std::isfinite(c_cor) || !std::isfinite(g_grav) || !std::isfinite(c1) || !std::isfinite(c2)) {
    fail(ErrorKind::config, "physics: constants must be finite");
  }
  rheology.validate();
}

double GrowthRate::stationary(double x) const {
  switch (shape) {
    case GrowthShape::zero: return 0.0;
    case GrowthShape::constant: return f0;
    case GrowthShape::linear: return f0 + f1 * (x - x_ref);
    case GrowthShape::tanh: return f0 + f1 * std::tanh(x - x_ref);
  }
  return 0.0;
}

double GrowthRate::operator()(double t, double x) const {
  const double base = stationary(x);
  if (time_amp == 0.0) return base;
  return base + time_amp * std::sin(2.0 * M_PI * t / period);
}

double GrowthRate::c1_bound() const {
  const double amp = std::abs(time_amp);
  switch (shape) {
    case GrowthShape::zero: return amp;
    case GrowthShape::constant: return std::abs(f0) + amp;
    case GrowthShape::linear:
      return f1 == 0.0 ? std::abs(f0) + amp : std::numeric_limits<double>::infinity();
    case GrowthShape::tanh: return std::abs(f0) + 2.0 * std::abs(f1) + amp;
  }
  return 0.0;
}

GrowthRate GrowthRate::constant_rate(double f0) {
  GrowthRate f;
  f.shape = GrowthShape::constant;
  f.f0 = f0;
  return f;
}

GrowthRate GrowthRate::linear_rate(double f0, double slope, double x_ref) {
  GrowthRate f;
  f.shape = GrowthShape::linear;
  f.f0 = f0;
  f.f1 = slope;
  f.x_ref = x_ref;
  return f;
}

GrowthRate GrowthRate::restoring(double beta, double x_ref, double time_amp, double period) {
  GrowthRate f;
  f.shape = GrowthShape::tanh;
  f.f1 = -beta;
  f.x_ref = x_ref;
  f.time_amp = time_amp;
  f.period = period;
  return f;
}

Profile parse_profile(const std::string& name) {
  if (name == "constant") return Profile::constant;
  if (name == "gaussian_bump") return Profile::gaussian_bump;
  if (name == "checkerboard") return Profile::checkerboard;
  fail(ErrorKind::config, "unknown profile '" + name + "'");
}

std::string to_string(Profile p) {
  switch (p) {
    case Profile::constant: return "constant";
    case Profile::gaussian_bump: return "gaussian_bump";
    case Profile::checkerboard: return "checkerboard";
  }
  return "constant";
}

Field make_profile(Profile p, const Grid2D& g) {
  Field out(g.node_count());
  for (int j = 0; j < g.nodes_y(); ++j) {
    for (int i = 0; i < g.nodes_x(); ++i) {
      const double x = g.x(i) / g.lx();
      const double y = g.y(j) / g.ly();
      double v = 1.0;
      if (p == Profile::gaussian_bump) {
        const double r2 = (x - 0.6) * (x - 0.6) + (y - 0.4) * (y - 0.4);
        v = std::exp(-r2 / (2.0 * 0.15 * 0.15));
      } else if (p == Profile::checkerboard) {
        v = std::cos(2.0 * M_PI * x) * std::cos(2.0 * M_PI * y);
      }
      out[g.index(i, j)] = v;
    }
  }
  return out;
}

const Field& PeriodicSignal::at_index(long k) const {
  const long n = static_cast<long>(samples.size());
  return samples[static_cast<std::size_t>(((k % n) + n) % n)];
}

Field PeriodicSignal::at(double t, std::size_t node_count) const {
  if (samples.empty()) return Field(node_count, 0.0);
  const int n = n_t();
  const double s = t / period * n;
  const double r = std::round(s);
  if (std::abs(s - r) < 1e-9) return at_index(static_cast<long>(r));

  // Periodic cardinal functions; the Nyquist term is halved.
  Field out(node_count, 0.0);
  for (int k = 0; k < n; ++k) {
    const double theta = 2.0 * M_PI * (s - k) / n;
    double w = 1.0;
    for (int m = 1; m < n / 2; ++m) w += 2.0 * std::cos(m * theta);
    if (n % 2 == 0) w += std::cos(0.5 * n * theta);
    w /= n;
    const Field& f = samples[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < node_count; ++i) out[i] += w * f[i];
  }
  return out;
}

PeriodicSignal PeriodicSignal::sinusoid(double amp, const Field& profile, int n_t, double T,
                                        double phase) {
  PeriodicSignal s;
  s.period = T;
  s.samples.resize(static_cast<std::size_t>(n_t));
  for (int k = 0; k < n_t; ++k) {
    const double c = amp * std::sin(2.0 * M_PI * k / n_t + phase);
    Field f(profile.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = c * profile[i];
    s.samples[static_cast<std::size_t>(k)] = std::move(f);
  }
  return s;
}

PeriodicSignal PeriodicSignal::constant(const Field& value, int n_t, double T) {
  PeriodicSignal s;
  s.period = T;
  s.samples.assign(static_cast<std::size_t>(n_t), value);
  return s;
}

VectorField VectorSignal::at(double t, std::size_t node_count) const {
  return {x.at(t, node_count), y.at(t, node_count)};
}

VectorField ForcingSpec::velocity_forcing(double t, const PhysParams& pp,
                                          std::size_t node_count) const {
  VectorField gu = g_u.at(t, node_count);
  if (wind_mode == WindMode::wind_shape && !wind_c.is_zero()) {
    const VectorField c = wind_c.at(t, node_count);
    for (std::size_t i = 0; i < node_count; ++i) {
      gu.x[i] += pp.c1 * c.x[i];
      gu.y[i] += pp.c1 * c.y[i];
    }
  }
  return gu;
}

Field thermo_Sh(const State& v, const GrowthRate& f, std::optional<double> t) {
  v.check_shape();
  const double f_zero = f.eval(t, 0.0);
  Field out(v.h.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double a = v.a[n];
    if (!(a > 0.0)) {
      fail(ErrorKind::degenerate_compactness,
           "thermo_Sh: compactness must be positive, got " + std::to_string(a));
    }
    out[n] = f.eval(t, v.h[n] / a) * a + (1.0 - a) * f_zero;
  }
  return out;
}

Field thermo_Sa(const State& v, const GrowthRate& f, double kappa, std::optional<double> t) {
  const Field sh = thermo_Sh(v, f, t);
  const double f_zero = f.eval(t, 0.0);
  Field out(sh.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (!(v.h[n] >= kappa)) {
      fail(ErrorKind::inadmissible_state, "thermo_Sa: h below kappa at node " + std::to_string(n));
    }
    const double growth = f_zero > 0.0 ? f_zero / kappa * (1.0 - v.a[n]) : 0.0;
    const double melt = sh[n] < 0.0 ? v.a[n] / (2.0 * v.h[n]) * sh[n] : 0.0;
    out[n] = growth + melt;
  }
  return out;
}

std::pair<VectorField, VectorField> drag_forces(const VectorField& u, const VectorField& U_atm,
                                                const VectorField& U_ocean, const Field& h,
                                                const PhysParams& pp) {
  const std::size_t n = h.size();
  if (u.x.size() != n || U_atm.x.size() != n || U_ocean.x.size() != n) {
    fail(ErrorKind::shape_mismatch, "drag_forces: field sizes differ");
  }
  VectorField atm{Field(n), Field(n)};
  VectorField ocean{Field(n), Field(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!(h[i] >= pp.kappa)) {
      fail(ErrorKind::inadmissible_state, "drag_forces: h below kappa at node " + std::to_string(i));
    }
    const double sa = pp.c1 * std::hypot(U_atm.x[i], U_atm.y[i]) / h[i];
    atm.x[i] = sa * U_atm.x[i];
    atm.y[i] = sa * U_atm.y[i];
    const double rx = U_ocean.x[i] - u.x[i];
    const double ry = U_ocean.y[i] - u.y[i];
    const double so = pp.c2 * std::hypot(rx, ry) / h[i];
    ocean.x[i] = so * rx;
    ocean.y[i] = so * ry;
  }
  return {atm, ocean};
}

VectorField coriolis(const VectorField& u, double c_cor) {
  VectorField out{Field(u.x.size()), Field(u.y.size())};
  for (std::size_t i = 0; i < u.x.size(); ++i) {
    out.x[i] = -c_cor * u.y[i];
    out.y[i] = c_cor * u.x[i];
  }
  return out;
}

State assemble_rhs(const State& v, double t, const ForcingSpec& fs, const PhysParams& pp,
                   RhsVariant variant) {
  v.check_shape();
  v.require_admissible(pp.kappa, "assemble_rhs");
  const Grid2D& g = *v.grid;
  const std::size_t n = g.node_count();

  // F_eps_p is built on the stationary growth rate; every other variant sees f(t).
  const std::optional<double> f_time =
      variant == RhsVariant::F_eps_p ? std::nullopt : std::optional<double>(t);
  const Field sh = thermo_Sh(v, fs.f, f_time);
  const Field sa = thermo_Sa(v, fs.f, pp.kappa, f_time);

  const VectorField cor = coriolis(v.u, pp.c_cor);
  const VectorField gradH = fs.grad_H.at(t, n);
  const Field gh = fs.g_h.at(t, n);
  const Field ga = fs.g_a.at(t, n);

  VectorField gu;
  if (variant == RhsVariant::full_F) {
    gu = fs.g_u.at(t, n);
    // In wind_shape mode (c1/h)|U_atm|U_atm is exactly c1 c(t).
    const VectorField atm_field = fs.U_atm.at(t, n);
    const VectorField ocean_field = fs.U_ocean.at(t, n);
    auto [atm, ocean] = drag_forces(v.u, atm_field, ocean_field, v.h, pp);
    if (fs.wind_mode == WindMode::wind_shape) {
      const VectorField c = fs.wind_c.at(t, n);
      for (std::size_t i = 0; i < n; ++i) {
        atm.x[i] = pp.c1 * c.x[i];
        atm.y[i] = pp.c1 * c.y[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      gu.x[i] += atm.x[i] + ocean.x[i];
      gu.y[i] += atm.y[i] + ocean.y[i];
    }
  } else {
    gu = fs.velocity_forcing(t, pp, n);
  }

  State out = State::zeros(v.grid);
  for (int j = 1; j <= g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const Eigen::Matrix2d grad = velocity_gradient(v.u, g, i, j);
      const double ux = v.u.x[k];
      const double uy = v.u.y[k];
      // (u . grad) u
      const double adv_x = ux * grad(0, 0) + uy * grad(0, 1);
      const double adv_y = ux * grad(1, 0) + uy * grad(1, 1);
      out.u.x[k] = -adv_x - cor.x[k] - pp.g_grav * gradH.x[k] + gu.x[k];
      out.u.y[k] = -adv_y - cor.y[k] - pp.g_grav * gradH.y[k] + gu.y[k];
    }
  }

  const bool shifted = variant == RhsVariant::F_eps_p || variant == RhsVariant::F_eps_p_t;
  const double eps = shifted ? pp.eps_shift : 0.0;
  for (int j = 0; j < g.nodes_y(); ++j) {
    for (int i = 0; i < g.nodes_x(); ++i) {
      const std::size_t k = g.index(i, j);
      const double div_u = derivative_at(v.u.x, g, Derivative::x, i, j) +
                           derivative_at(v.u.y, g, Derivative::y, i, j);
      const double ux = v.u.x[k];
      const double uy = v.u.y[k];
      const double div_uh = v.h[k] * div_u + ux * derivative_at(v.h, g, Derivative::x, i, j) +
                            uy * derivative_at(v.h, g, Derivative::y, i, j);
      const double div_ua = v.a[k] * div_u + ux * derivative_at(v.a, g, Derivative::x, i, j) +
                            uy * derivative_at(v.a, g, Derivative::y, i, j);
      out.h[k] = -div_uh + sh[k] + gh[k] + eps * v.h[k];
      out.a[k] = -div_ua + sa[k] + ga[k] + eps * v.a[k];
    }
  }
  return out;
}

}  // namespace hibler
