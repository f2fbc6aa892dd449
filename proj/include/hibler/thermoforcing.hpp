#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hibler/grid.hpp"
#include "hibler/rheology.hpp"

namespace hibler {

struct PhysParams {
  double rho_ice = 1.0;
  double c_cor = 0.1;
  double g_grav = 1.0;
  double d_h = 1.0;
  double d_a = 1.0;
  double kappa = 0.5;
  double eps_shift = 1.0;
  double c1 = 0.0;  // rho_atm C_atm R_atm / rho_ice, rotation folded in
  double c2 = 0.0;  // rho_ocean C_ocean R_ocean / rho_ice
  RheologyParams rheology;

  void validate() const;
};

enum class GrowthShape { zero, constant, linear, tanh };

/// Ice growth rate f(t, x) = f0 + f1 * phi(x - x_ref) + time_amp * sin(2 pi t / period)
/// with phi(s) = s (linear) or tanh(s).
struct GrowthRate {
  GrowthShape shape = GrowthShape::zero;
  double f0 = 0.0;
  double f1 = 0.0;
  double x_ref = 0.0;
  double time_amp = 0.0;
  double period = 1.0;

  bool time_dependent() const { return time_amp != 0.0; }
  double stationary(double x) const;
  double operator()(double t, double x) const;
  // Evaluates f(t, .) when t is set, the stationary part otherwise.
  double eval(std::optional<double> t, double x) const { return t ? (*this)(*t, x) : stationary(x); }
  /// sup |f| + sup |f'| over [0, inf), uniformly in t; infinite for the unbounded linear shape.
  double c1_bound() const;

  static GrowthRate constant_rate(double f0);
  static GrowthRate linear_rate(double f0, double slope, double x_ref = 0.0);
  static GrowthRate restoring(double beta, double x_ref, double time_amp = 0.0, double period = 1.0);
};

enum class Profile { constant, gaussian_bump, checkerboard };

Profile parse_profile(const std::string& name);
std::string to_string(Profile p);
Field make_profile(Profile p, const Grid2D& g);

/// Scalar field signal tabulated at n_t collocation times k T / n_t. Indexing
/// is cyclic; off-grid times use trigonometric interpolation, which is exact
/// for band-limited signals. An empty table is the zero signal.
struct PeriodicSignal {
  double period = 1.0;
  std::vector<Field> samples;

  bool is_zero() const { return samples.empty(); }
  int n_t() const { return static_cast<int>(samples.size()); }
  const Field& at_index(long k) const;
  Field at(double t, std::size_t node_count) const;

  /// amp * sin(2 pi t / T + phase) * profile sampled at n_t points.
  static PeriodicSignal sinusoid(double amp, const Field& profile, int n_t, double T,
                                 double phase = 0.0);
  static PeriodicSignal constant(const Field& value, int n_t, double T);
};

struct VectorSignal {
  PeriodicSignal x;
  PeriodicSignal y;

  bool is_zero() const { return x.is_zero() && y.is_zero(); }
  VectorField at(double t, std::size_t node_count) const;
};

enum class WindMode { analytic_gu, wind_shape };

struct ForcingSpec {
  double T = 1.0;
  int n_t = 32;
  VectorSignal g_u;
  PeriodicSignal g_h;
  PeriodicSignal g_a;
  VectorSignal grad_H;
  VectorSignal U_atm;
  VectorSignal U_ocean;
  WindMode wind_mode = WindMode::analytic_gu;
  VectorSignal wind_c;  // c(t) with |U_atm| U_atm = c(t) h
  GrowthRate f;

  /// Velocity forcing actually seen by the F_p family: g_u, plus c1 c(t) in wind_shape mode.
  VectorField velocity_forcing(double t, const PhysParams& pp, std::size_t node_count) const;
};

enum class RhsVariant { full_F, F_p, F_eps_p, F_eps_p_t };

/// S_h = f(h/a) a + (1 - a) f(0). t = nullopt evaluates the stationary part of f.
Field thermo_Sh(const State& v, const GrowthRate& f, std::optional<double> t = std::nullopt);

/// Case-defined compactness source. The unspecified edge cases f(0) = 0 and
/// S_h = 0 contribute 0.
Field thermo_Sa(const State& v, const GrowthRate& f, double kappa,
                std::optional<double> t = std::nullopt);

/// ((c1/h)|U_atm| U_atm, (c2/h)|U_ocean - u|(U_ocean - u)) per node.
std::pair<VectorField, VectorField> drag_forces(const VectorField& u, const VectorField& U_atm,
                                                const VectorField& U_ocean, const Field& h,
                                                const PhysParams& pp);

/// Horizontal part of c_cor n x u, i.e. c_cor (-u2, u1).
VectorField coriolis(const VectorField& u, double c_cor);

/// Right-hand side triple of the selected variant at time t, as a State on
/// v's grid (velocity zero on the boundary ring).
State assemble_rhs(const State& v, double t, const ForcingSpec& fs, const PhysParams& pp,
                   RhsVariant variant);

}  // namespace hibler
