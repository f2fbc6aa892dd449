#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hibler {

enum class NodeKind : std::uint8_t { interior, dirichlet_boundary, neumann_boundary };

// Velocity is pinned on the boundary ring; thickness and compactness carry
// unknowns on every lattice node with an even-reflection Neumann closure.
enum class FieldFamily { velocity, scalar };

/// Uniform collocated lattice on [0, lx] x [0, ly].
///
/// Nodes sit at (i*hx, j*hy) for i = 0..nx+1, j = 0..ny+1 with
/// hx = lx/(nx+1). The outer ring is the discrete boundary. Each field family
/// has its own mask classifying every node exactly once.
class Grid2D {
 public:
  static Grid2D build(int nx, int ny, double lx = 1.0, double ly = 1.0);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }

  int nodes_x() const noexcept { return nx_ + 2; }
  int nodes_y() const noexcept { return ny_ + 2; }
  std::size_t node_count() const noexcept {
    return static_cast<std::size_t>(nodes_x()) * static_cast<std::size_t>(nodes_y());
  }
  std::size_t interior_count() const noexcept {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nodes_x()) +
           static_cast<std::size_t>(i);
  }
  // Row-major position of an interior node among the nx*ny interior nodes.
  std::size_t interior_index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j - 1) * static_cast<std::size_t>(nx_) +
           static_cast<std::size_t>(i - 1);
  }

  double x(int i) const noexcept { return i * hx_; }
  double y(int j) const noexcept { return j * hy_; }

  bool on_boundary(int i, int j) const noexcept {
    return i == 0 || j == 0 || i == nx_ + 1 || j == ny_ + 1;
  }

  NodeKind kind(FieldFamily family, int i, int j) const noexcept {
    return mask(family)[index(i, j)];
  }
  std::span<const NodeKind> mask(FieldFamily family) const noexcept {
    return family == FieldFamily::velocity ? std::span<const NodeKind>(velocity_mask_)
                                           : std::span<const NodeKind>(scalar_mask_);
  }

  // Trapezoidal node weight: hx*hy inside, halved per boundary direction.
  double weight(int i, int j) const noexcept;

  friend bool operator==(const Grid2D& a, const Grid2D& b) noexcept {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.lx_ == b.lx_ && a.ly_ == b.ly_;
  }

 private:
  Grid2D() = default;

  int nx_ = 0;
  int ny_ = 0;
  double lx_ = 1.0;
  double ly_ = 1.0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  std::vector<NodeKind> velocity_mask_;
  std::vector<NodeKind> scalar_mask_;
};

using GridPtr = std::shared_ptr<const Grid2D>;

GridPtr make_grid(int nx, int ny, double lx = 1.0, double ly = 1.0);

using Field = std::vector<double>;

struct VectorField {
  Field x;
  Field y;
};

VectorField zero_vector_field(const Grid2D& g);

/// One time snapshot v = (u, h, a) on a shared grid. Velocity values on the
/// boundary ring are the Dirichlet data and stay zero for solver states.
struct State {
  GridPtr grid;
  VectorField u;
  Field h;
  Field a;

  static State zeros(GridPtr grid);
  static State equilibrium(GridPtr grid, double h_star, double a_star);

  double min_h() const;
  double min_a() const;
  bool admissible(double kappa) const { return min_h() >= kappa && min_a() > 0.0; }
  // Throws ErrorKind::inadmissible_state naming the caller.
  void require_admissible(double kappa, std::string_view where) const;
  void check_shape() const;
};

struct TensorField {
  Field e11;
  Field e12;
  Field e21;
  Field e22;
  bool symmetric = false;

  Eigen::Matrix2d at(std::size_t node) const {
    Eigen::Matrix2d m;
    m << e11[node], e12[node], e21[node], e22[node];
    return m;
  }
};

enum class Derivative { x, y, xx, xy, yy };

// Second-order stencils: centered where both neighbours exist, one-sided
// second-order on the boundary ring.
double derivative_at(std::span<const double> f, const Grid2D& g, Derivative d, int i, int j);
Field derivative(std::span<const double> f, const Grid2D& g, Derivative d);

// G(c, l) = d u_c / d x_l at node (i, j).
Eigen::Matrix2d velocity_gradient(const VectorField& u, const Grid2D& g, int i, int j);

TensorField deformation_tensor(const VectorField& u, const Grid2D& g);

/// Discrete L^q (order 0), W^{1,q} (order 1) or W^{2,q} (order 2) norm with
/// trapezoidal node weights. Derivative terms are combined in the l^q sense.
double spatial_norm(std::span<const double> f, const Grid2D& g, double q, int order);

// (sum |x_i|^q)^(1/q) for a handful of term norms.
double lq_combine(std::span<const double> terms, double q);

}  // namespace hibler
