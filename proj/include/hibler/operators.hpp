#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hibler/grid.hpp"
#include "hibler/rheology.hpp"

namespace hibler {

struct PhysParams;

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using ComplexSparse = Eigen::SparseMatrix<std::complex<double>>;

/// Stacked degrees of freedom: (u1, u2) on interior nodes, then (h, a) on
/// every lattice node.
struct DofLayout {
  Eigen::Index velocity = 0;  // dofs per velocity component
  Eigen::Index scalar = 0;    // dofs per scalar field

  static DofLayout of(const Grid2D& g) {
    return {static_cast<Eigen::Index>(g.interior_count()),
            static_cast<Eigen::Index>(g.node_count())};
  }
  Eigen::Index u1() const { return 0; }
  Eigen::Index u2() const { return velocity; }
  Eigen::Index h() const { return 2 * velocity; }
  Eigen::Index a() const { return 2 * velocity + scalar; }
  Eigen::Index total() const { return 2 * velocity + 2 * scalar; }
};

Eigen::VectorXd pack(const State& s);
State unpack(const Eigen::VectorXd& v, const GridPtr& grid);

enum class OperatorBlock { full, hibler, neumann, coupling, generic };

/// Boundary handling attached to an assembled operator.
struct BoundaryMeta {
  bool velocity_dirichlet_eliminated = false;  // boundary velocity dofs removed (u = 0)
  bool scalar_neumann_reflection = false;      // even-reflection ghosts folded into rows
};

struct DiscreteOperator {
  SparseMatrix matrix;
  OperatorBlock block = OperatorBlock::generic;
  BoundaryMeta boundary;
  GridPtr grid;  // null for abstract operators

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix * x; }

  static DiscreteOperator from_matrix(SparseMatrix m);
};

/// -d * Laplacian with even-reflection Neumann ghosts on every lattice node.
DiscreteOperator assemble_neumann_laplacian(const GridPtr& g, double d);

/// Hibler operator frozen at v0 acting on (u1, u2):
///   [A u]_i = sum a_ij^kl(grad u0, P0) D_k D_l u_j
///             - 1/(2 Delta_delta(eps(u0))) sum_j d_j P0 (S eps(u))_ij
/// with D_k D_l = -d_k d_l. Applied to u0 itself this reproduces -div S_delta.
DiscreteOperator assemble_hibler_linearized(const State& v0, const RheologyParams& params,
                                            double kappa);

/// Rows (u1, u2), columns (h, a): (dP/dh) / (2 rho h0) grad and (dP/da) / (2 rho h0) grad.
DiscreteOperator assemble_coupling_blocks(const State& v0, const RheologyParams& params,
                                          double rho_ice, double kappa);

/// Upper block-triangular operator
///   [ H/(rho h0)   C_h          C_a        ]
///   [ 0            -d_h Lap_N + eps   0    ]
///   [ 0            0    -d_a Lap_N + eps   ]
DiscreteOperator assemble_A_eps(const State& v0, double eps_shift, const PhysParams& pp);

struct ModeProbe {
  int k = 0;
  double sigma_min = 0.0;
  bool pass = false;
};

struct MonodromyReport {
  double period = 0.0;
  double norm1 = 0.0;
  double threshold = 0.0;
  std::vector<ModeProbe> modes;  // k = -n_modes .. n_modes
  std::vector<int> failing;
  bool pass = false;
};

/// Discrete Arendt-Bu check: smallest singular value of (i 2 pi k / T + A)
/// for every |k| <= n_modes against rel_threshold * ||A||_1.
MonodromyReport monodromy_invertibility_check(const SparseMatrix& A, double T, int n_modes,
                                              bool throw_on_failure = true,
                                              double rel_threshold = 1e-10);

/// Smallest singular value by inverse iteration on B^H B (0 if B is singular).
double smallest_singular_value(const ComplexSparse& B);
// Same, reusing an existing factorization of B.
double smallest_singular_value(Eigen::SparseLU<ComplexSparse>& lu, Eigen::Index n);

double norm1(const SparseMatrix& A);

ComplexSparse shifted_complex(const SparseMatrix& A, std::complex<double> shift);

/// Debug dump: one "row col value" triplet per line.
void write_triplets(std::ostream& os, const SparseMatrix& A);

}  // namespace hibler
