#include "hibler/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "hibler/errors.hpp"

namespace hibler {

namespace {

struct Stencil {
  std::array<int, 4> offset{};
  std::array<double, 4> weight{};
  int size = 0;
};

// Node positions 0..n-1 along one axis.
Stencil first_stencil(int i, int n) {
  if (i == 0) return {{0, 1, 2, 0}, {-1.5, 2.0, -0.5, 0.0}, 3};
  if (i == n - 1) return {{0, -1, -2, 0}, {1.5, -2.0, 0.5, 0.0}, 3};
  return {{-1, 1, 0, 0}, {-0.5, 0.5, 0.0, 0.0}, 2};
}

Stencil second_stencil(int i, int n) {
  if (i == 0) return {{0, 1, 2, 3}, {2.0, -5.0, 4.0, -1.0}, 4};
  if (i == n - 1) return {{0, -1, -2, -3}, {2.0, -5.0, 4.0, -1.0}, 4};
  return {{-1, 0, 1, 0}, {1.0, -2.0, 1.0, 0.0}, 3};
}

}  // namespace

Grid2D Grid2D::build(int nx, int ny, double lx, double ly) {
  if (nx < 3 || ny < 3) {
    fail(ErrorKind::dimension_too_small,
         "grid needs at least 3 interior nodes per axis, got " + std::to_string(nx) + "x" +
             std::to_string(ny));
  }
  if (!(lx > 0.0) || !(ly > 0.0)) {
    fail(ErrorKind::invalid_argument, "grid extents must be positive");
  }
  Grid2D g;
  g.nx_ = nx;
  g.ny_ = ny;
  g.lx_ = lx;
  g.ly_ = ly;
  g.hx_ = lx / (nx + 1);
  g.hy_ = ly / (ny + 1);
  g.velocity_mask_.resize(g.node_count());
  g.scalar_mask_.resize(g.node_count());
  for (int j = 0; j < g.nodes_y(); ++j) {
    for (int i = 0; i < g.nodes_x(); ++i) {
      const bool edge = g.on_boundary(i, j);
      g.velocity_mask_[g.index(i, j)] = edge ? NodeKind::dirichlet_boundary : NodeKind::interior;
      g.scalar_mask_[g.index(i, j)] = edge ? NodeKind::neumann_boundary : NodeKind::interior;
    }
  }
  return g;
}

double Grid2D::weight(int i, int j) const noexcept {
  double w = hx_ * hy_;
  if (i == 0 || i == nx_ + 1) w *= 0.5;
  if (j == 0 || j == ny_ + 1) w *= 0.5;
  return w;
}

GridPtr make_grid(int nx, int ny, double lx, double ly) {
  return std::make_shared<const Grid2D>(Grid2D::build(nx, ny, lx, ly));
}

VectorField zero_vector_field(const Grid2D& g) {
  return {Field(g.node_count(), 0.0), Field(g.node_count(), 0.0)};
}

State State::zeros(GridPtr grid) {
  State s;
  const std::size_t n = grid->node_count();
  s.u = zero_vector_field(*grid);
  s.h.assign(n, 0.0);
  s.a.assign(n, 0.0);
  s.grid = std::move(grid);
  return s;
}

State State::equilibrium(GridPtr grid, double h_star, double a_star) {
  State s = zeros(std::move(grid));
  std::fill(s.h.begin(), s.h.end(), h_star);
  std::fill(s.a.begin(), s.a.end(), a_star);
  return s;
}

double State::min_h() const { return *std::min_element(h.begin(), h.end()); }
double State::min_a() const { return *std::min_element(a.begin(), a.end()); }

void State::require_admissible(double kappa, std::string_view where) const {
  const double mh = min_h();
  const double ma = min_a();
  if (!(mh >= kappa) || !(ma > 0.0)) {
    fail(ErrorKind::inadmissible_state,
         std::string(where) + ": state not admissible (min h = " + std::to_string(mh) +
             ", kappa = " + std::to_string(kappa) + ", min a = " + std::to_string(ma) + ")");
  }
}

void State::check_shape() const {
  if (!grid) fail(ErrorKind::shape_mismatch, "state has no grid");
  const std::size_t n = grid->node_count();
  if (u.x.size() != n || u.y.size() != n || h.size() != n || a.size() != n) {
    fail(ErrorKind::shape_mismatch, "state fields do not match the grid node count");
  }
}

double derivative_at(std::span<const double> f, const Grid2D& g, Derivative d, int i, int j) {
  const int mx = g.nodes_x();
  const int my = g.nodes_y();
  auto at = [&](int ii, int jj) { return f[g.index(ii, jj)]; };
  switch (d) {
    case Derivative::x: {
      const Stencil s = first_stencil(i, mx);
      double acc = 0.0;
      for (int k = 0; k < s.size; ++k) acc += s.weight[k] * at(i + s.offset[k], j);
      return acc / g.hx();
    }
    case Derivative::y: {
      const Stencil s = first_stencil(j, my);
      double acc = 0.0;
      for (int k = 0; k < s.size; ++k) acc += s.weight[k] * at(i, j + s.offset[k]);
      return acc / g.hy();
    }
    case Derivative::xx: {
      const Stencil s = second_stencil(i, mx);
      double acc = 0.0;
      for (int k = 0; k < s.size; ++k) acc += s.weight[k] * at(i + s.offset[k], j);
      return acc / (g.hx() * g.hx());
    }
    case Derivative::yy: {
      const Stencil s = second_stencil(j, my);
      double acc = 0.0;
      for (int k = 0; k < s.size; ++k) acc += s.weight[k] * at(i, j + s.offset[k]);
      return acc / (g.hy() * g.hy());
    }
    case Derivative::xy: {
      const Stencil sx = first_stencil(i, mx);
      const Stencil sy = first_stencil(j, my);
      double acc = 0.0;
      for (int a = 0; a < sx.size; ++a) {
        for (int b = 0; b < sy.size; ++b) {
          acc += sx.weight[a] * sy.weight[b] * at(i + sx.offset[a], j + sy.offset[b]);
        }
      }
      return acc / (g.hx() * g.hy());
    }
  }
  return 0.0;
}

Field derivative(std::span<const double> f, const Grid2D& g, Derivative d) {
  if (f.size() != g.node_count()) fail(ErrorKind::shape_mismatch, "field size != node count");
  Field out(g.node_count());
  for (int j = 0; j < g.nodes_y(); ++j) {
    for (int i = 0; i < g.nodes_x(); ++i) out[g.index(i, j)] = derivative_at(f, g, d, i, j);
  }
  return out;
}

Eigen::Matrix2d velocity_gradient(const VectorField& u, const Grid2D& g, int i, int j) {
  Eigen::Matrix2d grad;
  grad(0, 0) = derivative_at(u.x, g, Derivative::x, i, j);
  grad(0, 1) = derivative_at(u.x, g, Derivative::y, i, j);
  grad(1, 0) = derivative_at(u.y, g, Derivative::x, i, j);
  grad(1, 1) = derivative_at(u.y, g, Derivative::y, i, j);
  return grad;
}

TensorField deformation_tensor(const VectorField& u, const Grid2D& g) {
  if (u.x.size() != g.node_count() || u.y.size() != g.node_count()) {
    fail(ErrorKind::shape_mismatch, "velocity field does not match grid");
  }
  TensorField eps;
  const std::size_t n = g.node_count();
  eps.e11.resize(n);
  eps.e12.resize(n);
  eps.e21.resize(n);
  eps.e22.resize(n);
  for (int j = 0; j < g.nodes_y(); ++j) {
    for (int i = 0; i < g.nodes_x(); ++i) {
      const Eigen::Matrix2d grad = velocity_gradient(u, g, i, j);
      const std::size_t k = g.index(i, j);
      const double shear = 0.5 * (grad(0, 1) + grad(1, 0));
      eps.e11[k] = grad(0, 0);
      eps.e22[k] = grad(1, 1);
      eps.e12[k] = shear;
      eps.e21[k] = shear;
    }
  }
  eps.symmetric = true;
  return eps;
}

double lq_combine(std::span<const double> terms, double q) {
  double acc = 0.0;
  for (double t : terms) acc += std::pow(std::abs(t), q);
  return std::pow(acc, 1.0 / q);
}

namespace {

double weighted_lq(std::span<const double> f, const Grid2D& g, double q) {
  double acc = 0.0;
  for (int j = 0; j < g.nodes_y(); ++j) {
    for (int i = 0; i < g.nodes_x(); ++i) {
      acc += g.weight(i, j) * std::pow(std::abs(f[g.index(i, j)]), q);
    }
  }
  return std::pow(acc, 1.0 / q);
}

}  // namespace

double spatial_norm(std::span<const double> f, const Grid2D& g, double q, int order) {
  if (!(q > 1.0) || !std::isfinite(q)) {
    fail(ErrorKind::invalid_exponent, "norm exponent q must lie in (1, inf)");
  }
  if (order < 0 || order > 2) fail(ErrorKind::invalid_argument, "norm order must be 0, 1 or 2");
  if (f.size() != g.node_count()) fail(ErrorKind::shape_mismatch, "field size != node count");

  std::vector<double> terms{weighted_lq(f, g, q)};
  if (order >= 1) {
    terms.push_back(weighted_lq(derivative(f, g, Derivative::x), g, q));
    terms.push_back(weighted_lq(derivative(f, g, Derivative::y), g, q));
  }
  if (order >= 2) {
    terms.push_back(weighted_lq(derivative(f, g, Derivative::xx), g, q));
    terms.push_back(weighted_lq(derivative(f, g, Derivative::xy), g, q));
    terms.push_back(weighted_lq(derivative(f, g, Derivative::yy), g, q));
  }
  return lq_combine(terms, q);
}

}  // namespace hibler
