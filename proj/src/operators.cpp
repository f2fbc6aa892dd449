#include "hibler/operators.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include <Eigen/SparseLU>

#include "hibler/errors.hpp"
#include "hibler/parallel.hpp"
#include "hibler/thermoforcing.hpp"

namespace hibler {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

Field pressure_field(const State& v, const RheologyParams& p) {
  Field P(v.h.size());
  for (std::size_t n = 0; n < P.size(); ++n) P[n] = pressure(v.h[n], v.a[n], p).value;
  return P;
}

void add_neumann_laplacian(Triplets& t, const Grid2D& g, double d, Eigen::Index offset) {
  const double cx = d / (g.hx() * g.hx());
  const double cy = d / (g.hy() * g.hy());
  const int mx = g.nodes_x();
  const int my = g.nodes_y();
  for (int j = 0; j < my; ++j) {
    for (int i = 0; i < mx; ++i) {
      const Eigen::Index row = offset + static_cast<Eigen::Index>(g.index(i, j));
      auto col = [&](int ii, int jj) { return offset + static_cast<Eigen::Index>(g.index(ii, jj)); };
      // Even reflection: the missing neighbour mirrors the one inside.
      const int il = i == 0 ? 1 : i - 1;
      const int ir = i == mx - 1 ? mx - 2 : i + 1;
      const int jd = j == 0 ? 1 : j - 1;
      const int ju = j == my - 1 ? my - 2 : j + 1;
      t.emplace_back(row, row, 2.0 * cx + 2.0 * cy);
      t.emplace_back(row, col(il, j), -cx);
      t.emplace_back(row, col(ir, j), -cx);
      t.emplace_back(row, col(i, jd), -cy);
      t.emplace_back(row, col(i, ju), -cy);
    }
  }
}

// Hibler rows for (u1, u2) at interior nodes; `row_scale(node)` multiplies each row.
template <class Scale>
void add_hibler(Triplets& t, const State& v0, const RheologyParams& rp, Scale row_scale) {
  const Grid2D& g = *v0.grid;
  const DofLayout lay = DofLayout::of(g);
  const Field P = pressure_field(v0, rp);
  const double hx = g.hx();
  const double hy = g.hy();

  for (int j = 1; j <= g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      const std::size_t node = g.index(i, j);
      const Tensor2 grad = velocity_gradient(v0.u, g, i, j);
      const Tensor2 eps = 0.5 * (grad + grad.transpose());
      const CoeffTensor a = coeff_tensor(grad, P[node], rp);
      const double D = delta_delta(eps, rp);
      const double dP[2] = {derivative_at(P, g, Derivative::x, i, j),
                            derivative_at(P, g, Derivative::y, i, j)};
      const double scale = row_scale(node);

      for (int c = 0; c < 2; ++c) {
        const Eigen::Index row =
            (c == 0 ? lay.u1() : lay.u2()) + static_cast<Eigen::Index>(g.interior_index(i, j));
        auto add = [&](int m, int ii, int jj, double value) {
          if (value == 0.0 || g.on_boundary(ii, jj)) return;  // Dirichlet data is zero
          const Eigen::Index col =
              (m == 0 ? lay.u1() : lay.u2()) + static_cast<Eigen::Index>(g.interior_index(ii, jj));
          t.emplace_back(row, col, scale * value);
        };

        for (int m = 0; m < 2; ++m) {
          // D_k D_l = -d_k d_l.
          const double axx = -a(c, m, 0, 0) / (hx * hx);
          const double ayy = -a(c, m, 1, 1) / (hy * hy);
          const double axy = -(a(c, m, 0, 1) + a(c, m, 1, 0)) / (4.0 * hx * hy);
          add(m, i - 1, j, axx);
          add(m, i + 1, j, axx);
          add(m, i, j - 1, ayy);
          add(m, i, j + 1, ayy);
          add(m, i, j, -2.0 * axx - 2.0 * ayy);
          add(m, i + 1, j + 1, axy);
          add(m, i - 1, j - 1, axy);
          add(m, i + 1, j - 1, -axy);
          add(m, i - 1, j + 1, -axy);

          // -(1/(2D)) sum_k dP_k (S G)_{ck}, G_{ml} = d_l u_m.
          for (int l = 0; l < 2; ++l) {
            double w = 0.0;
            for (int k = 0; k < 2; ++k) w += dP[k] * s_tensor(c, m, k, l, rp.e);
            w *= -1.0 / (2.0 * D);
            if (w == 0.0) continue;
            if (l == 0) {
              add(m, i + 1, j, 0.5 * w / hx);
              add(m, i - 1, j, -0.5 * w / hx);
            } else {
              add(m, i, j + 1, 0.5 * w / hy);
              add(m, i, j - 1, -0.5 * w / hy);
            }
          }
        }
      }
    }
  }
}

void add_coupling(Triplets& t, const State& v0, const RheologyParams& rp, double rho_ice) {
  const Grid2D& g = *v0.grid;
  const DofLayout lay = DofLayout::of(g);
  for (int j = 1; j <= g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      const std::size_t node = g.index(i, j);
      const Pressure pr = pressure(v0.h[node], v0.a[node], rp);
      const double denom = 2.0 * rho_ice * v0.h[node];
      const double coef[2] = {pr.d_dh / denom, pr.d_da / denom};
      const Eigen::Index offs[2] = {lay.h(), lay.a()};
      const Eigen::Index r = static_cast<Eigen::Index>(g.interior_index(i, j));
      for (int s = 0; s < 2; ++s) {
        if (coef[s] == 0.0) continue;
        auto col = [&](int ii, int jj) { return offs[s] + static_cast<Eigen::Index>(g.index(ii, jj)); };
        const double cx = 0.5 * coef[s] / g.hx();
        const double cy = 0.5 * coef[s] / g.hy();
        t.emplace_back(lay.u1() + r, col(i + 1, j), cx);
        t.emplace_back(lay.u1() + r, col(i - 1, j), -cx);
        t.emplace_back(lay.u2() + r, col(i, j + 1), cy);
        t.emplace_back(lay.u2() + r, col(i, j - 1), -cy);
      }
    }
  }
}

}  // namespace

Eigen::VectorXd pack(const State& s) {
  s.check_shape();
  const Grid2D& g = *s.grid;
  const DofLayout lay = DofLayout::of(g);
  Eigen::VectorXd v(lay.total());
  for (int j = 1; j <= g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      const auto r = static_cast<Eigen::Index>(g.interior_index(i, j));
      v[lay.u1() + r] = s.u.x[g.index(i, j)];
      v[lay.u2() + r] = s.u.y[g.index(i, j)];
    }
  }
  for (Eigen::Index n = 0; n < lay.scalar; ++n) {
    v[lay.h() + n] = s.h[static_cast<std::size_t>(n)];
    v[lay.a() + n] = s.a[static_cast<std::size_t>(n)];
  }
  return v;
}

State unpack(const Eigen::VectorXd& v, const GridPtr& grid) {
  const Grid2D& g = *grid;
  const DofLayout lay = DofLayout::of(g);
  if (v.size() != lay.total()) {
    fail(ErrorKind::shape_mismatch, "dof vector has " + std::to_string(v.size()) +
                                        " entries, layout expects " + std::to_string(lay.total()));
  }
  State s = State::zeros(grid);
  for (int j = 1; j <= g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      const auto r = static_cast<Eigen::Index>(g.interior_index(i, j));
      s.u.x[g.index(i, j)] = v[lay.u1() + r];
      s.u.y[g.index(i, j)] = v[lay.u2() + r];
    }
  }
  for (Eigen::Index n = 0; n < lay.scalar; ++n) {
    s.h[static_cast<std::size_t>(n)] = v[lay.h() + n];
    s.a[static_cast<std::size_t>(n)] = v[lay.a() + n];
  }
  return s;
}

DiscreteOperator DiscreteOperator::from_matrix(SparseMatrix m) {
  DiscreteOperator op;
  op.matrix = std::move(m);
  op.matrix.makeCompressed();
  return op;
}

DiscreteOperator assemble_neumann_laplacian(const GridPtr& g, double d) {
  if (!(d > 0.0)) fail(ErrorKind::invalid_argument, "diffusivity must be positive");
  Triplets t;
  t.reserve(5 * g->node_count());
  add_neumann_laplacian(t, *g, d, 0);
  const auto n = static_cast<Eigen::Index>(g->node_count());
  DiscreteOperator op;
  op.matrix = from_triplets(n, n, t);
  op.block = OperatorBlock::neumann;
  op.boundary.scalar_neumann_reflection = true;
  op.grid = g;
  return op;
}

DiscreteOperator assemble_hibler_linearized(const State& v0, const RheologyParams& params,
                                            double kappa) {
  v0.check_shape();
  v0.require_admissible(kappa, "assemble_hibler_linearized");
  Triplets t;
  t.reserve(26 * v0.grid->interior_count());
  add_hibler(t, v0, params, [](std::size_t) { return 1.0; });
  const auto n = static_cast<Eigen::Index>(2 * v0.grid->interior_count());
  DiscreteOperator op;
  op.matrix = from_triplets(n, n, t);
  op.block = OperatorBlock::hibler;
  op.boundary.velocity_dirichlet_eliminated = true;
  op.grid = v0.grid;
  return op;
}

DiscreteOperator assemble_coupling_blocks(const State& v0, const RheologyParams& params,
                                          double rho_ice, double kappa) {
  v0.check_shape();
  v0.require_admissible(kappa, "assemble_coupling_blocks");
  if (!(rho_ice > 0.0)) fail(ErrorKind::invalid_argument, "rho_ice must be positive");
  const DofLayout lay = DofLayout::of(*v0.grid);
  Triplets t;
  t.reserve(8 * v0.grid->interior_count());
  add_coupling(t, v0, params, rho_ice);
  // Columns are shifted back so the block maps (h, a) -> (u1, u2).
  for (auto& e : t) e = Eigen::Triplet<double>(e.row(), e.col() - lay.h(), e.value());
  DiscreteOperator op;
  op.matrix = from_triplets(2 * lay.velocity, 2 * lay.scalar, t);
  op.block = OperatorBlock::coupling;
  op.boundary.velocity_dirichlet_eliminated = true;
  op.grid = v0.grid;
  return op;
}

DiscreteOperator assemble_A_eps(const State& v0, double eps_shift, const PhysParams& pp) {
  v0.check_shape();
  v0.require_admissible(pp.kappa, "assemble_A_eps");
  if (!(eps_shift >= 0.0)) fail(ErrorKind::invalid_argument, "eps_shift must be nonnegative");
  const Grid2D& g = *v0.grid;
  const DofLayout lay = DofLayout::of(g);
  Triplets t;
  t.reserve(26 * g.interior_count() + 8 * g.interior_count() + 12 * g.node_count());
  add_hibler(t, v0, pp.rheology,
             [&](std::size_t node) { return 1.0 / (pp.rho_ice * v0.h[node]); });
  add_coupling(t, v0, pp.rheology, pp.rho_ice);
  add_neumann_laplacian(t, g, pp.d_h, lay.h());
  add_neumann_laplacian(t, g, pp.d_a, lay.a());
  if (eps_shift != 0.0) {
    for (Eigen::Index n = 0; n < 2 * lay.scalar; ++n) t.emplace_back(lay.h() + n, lay.h() + n, eps_shift);
  }
  DiscreteOperator op;
  op.matrix = from_triplets(lay.total(), lay.total(), t);
  op.block = OperatorBlock::full;
  op.boundary.velocity_dirichlet_eliminated = true;
  op.boundary.scalar_neumann_reflection = true;
  op.grid = v0.grid;
  return op;
}

double norm1(const SparseMatrix& A) {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(A.cols());
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) col[it.col()] += std::abs(it.value());
  }
  return col.size() ? col.maxCoeff() : 0.0;
}

ComplexSparse shifted_complex(const SparseMatrix& A, std::complex<double> shift) {
  std::vector<Eigen::Triplet<std::complex<double>>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() + A.rows()));
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  }
  if (shift != 0.0) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) t.emplace_back(i, i, shift);
  }
  ComplexSparse B(A.rows(), A.cols());
  B.setFromTriplets(t.begin(), t.end());
  B.makeCompressed();
  return B;
}

double smallest_singular_value(const ComplexSparse& B) {
  if (B.rows() != B.cols()) fail(ErrorKind::shape_mismatch, "singular value probe needs a square matrix");
  if (B.rows() == 0) return 0.0;
  Eigen::SparseLU<ComplexSparse> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success) return 0.0;
  return smallest_singular_value(lu, B.rows());
}

double smallest_singular_value(Eigen::SparseLU<ComplexSparse>& lu, Eigen::Index n) {
  // Power iteration on (B^H B)^{-1} = B^{-1} B^{-H}.
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = {nd(rng), nd(rng)};
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 300; ++it) {
    const Eigen::VectorXcd y = lu.adjoint().solve(x);
    const Eigen::VectorXcd z = lu.solve(y);
    const double next = z.norm();
    if (!std::isfinite(next)) return 0.0;
    if (next == 0.0) break;
    x = z / next;
    const bool done = std::abs(next - lambda) <= 1e-11 * next;
    lambda = next;
    if (done) break;
  }
  if (!(lambda > 0.0)) return 0.0;
  return 1.0 / std::sqrt(lambda);
}

MonodromyReport monodromy_invertibility_check(const SparseMatrix& A, double T, int n_modes,
                                              bool throw_on_failure, double rel_threshold) {
  if (A.rows() != A.cols()) fail(ErrorKind::shape_mismatch, "monodromy check needs a square operator");
  if (!(T > 0.0)) fail(ErrorKind::invalid_argument, "period must be positive");
  if (n_modes < 0) fail(ErrorKind::invalid_argument, "n_modes must be nonnegative");

  MonodromyReport rep;
  rep.period = T;
  rep.norm1 = norm1(A);
  rep.threshold = rel_threshold * rep.norm1;

  // A is real, so mode -k has the same singular values as mode k.
  std::vector<double> sigma(static_cast<std::size_t>(n_modes) + 1);
  const double omega = 2.0 * M_PI / T;
  parallel_for(sigma.size(), [&](std::size_t k) {
    sigma[k] = smallest_singular_value(shifted_complex(A, {0.0, omega * static_cast<double>(k)}));
  });

  for (int k = -n_modes; k <= n_modes; ++k) {
    const double s = sigma[static_cast<std::size_t>(std::abs(k))];
    const bool ok = s > rep.threshold;
    rep.modes.push_back({k, s, ok});
    if (!ok) rep.failing.push_back(k);
  }
  rep.pass = rep.failing.empty();
  if (!rep.pass && throw_on_failure) {
    std::string list;
    for (int k : rep.failing) list += (list.empty() ? "" : ", ") + std::to_string(k);
    throw ResonanceError(rep.failing, "operator is singular at temporal modes k = {" + list + "}");
  }
  return rep;
}

void write_triplets(std::ostream& os, const SparseMatrix& A) {
  os.precision(17);
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace hibler
