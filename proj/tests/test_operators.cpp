#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "hibler/errors.hpp"
#include "hibler/operators.hpp"
#include "hibler/thermoforcing.hpp"
#include "oracles.hpp"

using namespace hibler;

namespace {

Eigen::VectorXd nodal(const Grid2D& g, auto&& f) {
  Eigen::VectorXd v(g.node_count());
  for (int j = 0; j < g.nodes_y(); ++j)
    for (int i = 0; i < g.nodes_x(); ++i) v[g.index(i, j)] = f(g.x(i), g.y(j));
  return v;
}

State random_state(GridPtr g, std::mt19937_64& rng, double u_amp) {
  std::uniform_real_distribution<double> U(-1, 1);
  State s = State::zeros(g);
  for (int j = 0; j < g->nodes_y(); ++j)
    for (int i = 0; i < g->nodes_x(); ++i) {
      const std::size_t n = g->index(i, j);
      s.h[n] = 1.0 + 0.3 * U(rng);
      s.a[n] = 0.8 + 0.15 * U(rng);
      if (!g->on_boundary(i, j)) {
        s.u.x[n] = u_amp * U(rng);
        s.u.y[n] = u_amp * U(rng);
      }
    }
  return s;
}

}  // namespace

TEST_CASE("Neumann Laplacian kills constants and has zero row sums") {
  auto g = make_grid(8, 6);
  const auto L = assemble_neumann_laplacian(g, 1.7);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(L.cols());
  CHECK((L.apply(one)).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index r = 0; r < L.rows(); ++r) {
    double s = 0;
    for (SparseMatrix::InnerIterator it(L.matrix, r); it; ++it) s += it.value();
    CHECK(std::abs(s) < 1e-9);
  }
}

TEST_CASE("Neumann Laplacian on cos(pi x) converges at second order") {
  double prev_err = 0;
  for (int n : {8, 16, 32}) {
    auto g = make_grid(n, n);
    const auto L = assemble_neumann_laplacian(g, 1.0);
    const Eigen::VectorXd f = nodal(*g, [](double x, double) { return std::cos(M_PI * x); });
    const Eigen::VectorXd r = L.apply(f) - M_PI * M_PI * f;
    const double err = r.cwiseAbs().maxCoeff();
    if (prev_err > 0) CHECK(prev_err / err > 3.5);
    prev_err = err;
  }
}

TEST_CASE("linearized Hibler operator basics") {
  auto g = make_grid(6, 6);
  RheologyParams rp;
  const State v = State::equilibrium(g, 1.0, 1.0);
  const auto H = assemble_hibler_linearized(v, rp, 0.5);
  CHECK(H.rows() == 2 * 36);
  CHECK(H.apply(Eigen::VectorXd::Zero(H.cols())).norm() == 0.0);

  // Constant state: a = (P/(2 sqrt delta)) S, no lower-order term, so the
  // stencil is the same at every interior node away from the boundary.
  const auto& A = H.matrix;
  auto entry = [&](Eigen::Index r, Eigen::Index c) { return A.coeff(r, c); };
  const auto& gr = *g;
  const Eigen::Index c0 = gr.interior_index(3, 3), c1 = gr.interior_index(4, 3);
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const Eigen::Index n0 = gr.interior_index(3 + di, 3 + dj), n1 = gr.interior_index(4 + di, 3 + dj);
      CHECK(entry(c0, n0) == doctest::Approx(entry(c1, n1)));
      CHECK(entry(c0, 36 + n0) == doctest::Approx(entry(c1, 36 + n1)));
    }
  const double P = pressure(1.0, 1.0, rp).value;
  const double k = P / (2.0 * std::sqrt(rp.delta));
  const double hx = gr.hx();
  // Diagonal: -2 (a^{xx} + a^{yy}) / h^2 with the sign of D_k D_l = -d_k d_l.
  const double diag = 2.0 * k * (s_tensor(0, 0, 0, 0, rp.e) + s_tensor(0, 0, 1, 1, rp.e)) / (hx * hx);
  CHECK(entry(c0, c0) == doctest::Approx(diag));
}

TEST_CASE("linearized operator matches the finite-difference Jacobian at rest") {
  auto g = make_grid(8, 8);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> N;
  RheologyParams rp;
  rp.delta = 1e-2;
  for (int trial = 0; trial < 5; ++trial) {
    const State v0 = random_state(g, rng, 0.0);
    const auto H = assemble_hibler_linearized(v0, rp, 0.5);
    Eigen::VectorXd w(H.cols());
    for (auto& x : w) x = N(rng);
    w.normalize();
    const Eigen::VectorXd fd = oracle::fd_jacobian_apply(v0, rp, w, 1e-5);
    const Eigen::VectorXd an = H.apply(w);
    CHECK((fd - an).norm() / an.norm() < 1e-6);
  }
}

TEST_CASE("frozen operator applied to u0 reproduces the stress divergence") {
  auto g = make_grid(8, 8);
  std::mt19937_64 rng(22);
  RheologyParams rp;
  rp.delta = 1e-2;
  for (int trial = 0; trial < 5; ++trial) {
    const State v0 = random_state(g, rng, 0.05);
    const auto H = assemble_hibler_linearized(v0, rp, 0.5);
    const Eigen::VectorXd u = pack(v0).head(H.cols());
    const Eigen::VectorXd ref = oracle::stress_divergence(v0, rp);
    CHECK((H.apply(u) - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("coupling blocks") {
  auto g = make_grid(8, 8);
  RheologyParams rp;
  const State v0 = State::equilibrium(g, 1.0, 1.0);
  const auto C1 = assemble_coupling_blocks(v0, rp, 1.0, 0.5);
  const auto C2 = assemble_coupling_blocks(v0, rp, 2.0, 0.5);
  const Eigen::Index ns = g->node_count(), nv = g->interior_count();
  CHECK(C1.rows() == 2 * nv);
  CHECK(C1.cols() == 2 * ns);
  CHECK(C1.apply(Eigen::VectorXd::Ones(2 * ns)).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::VectorXd in = Eigen::VectorXd::Zero(2 * ns);
  in.head(ns) = nodal(*g, [](double x, double) { return x; });
  const Eigen::VectorXd out = C1.apply(in);
  CHECK(out.head(nv).cwiseAbs().minCoeff() == doctest::Approx(0.5));
  CHECK(out.head(nv).cwiseAbs().maxCoeff() == doctest::Approx(0.5));
  CHECK(out.tail(nv).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((C2.apply(in) - 0.5 * out).norm() < 1e-12);
}

TEST_CASE("A_eps at a constant state") {
  auto g = make_grid(8, 8);
  PhysParams pp;
  const State vs = State::equilibrium(g, 1.3, 0.9);
  const auto A = assemble_A_eps(vs, 0.7, pp);
  const DofLayout lay = DofLayout::of(*g);
  const Eigen::VectorXd out = A.apply(pack(vs));
  CHECK(out.head(2 * lay.velocity).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((out.segment(lay.h(), lay.scalar).array() - 0.7 * 1.3).abs().maxCoeff() < 1e-12);
  CHECK((out.segment(lay.a(), lay.scalar).array() - 0.7 * 0.9).abs().maxCoeff() < 1e-12);

  const auto A0 = assemble_A_eps(State::equilibrium(g, 1.0, 1.0), 0.0, pp);
  CHECK(A0.apply(pack(State::equilibrium(g, 1.0, 1.0))).cwiseAbs().maxCoeff() < 1e-10);

  // Scalar rows never touch velocity columns.
  for (Eigen::Index r = lay.h(); r < lay.total(); ++r)
    for (SparseMatrix::InnerIterator it(A.matrix, r); it; ++it) CHECK(it.col() >= lay.h());
}

TEST_CASE("monodromy check on scalars") {
  SparseMatrix one(1, 1), zero(1, 1);
  one.insert(0, 0) = 1.0;
  zero.insert(0, 0) = 0.0;
  const auto rep = monodromy_invertibility_check(one, 1.0, 4, false);
  CHECK(rep.pass);
  for (const auto& m : rep.modes)
    if (m.k == 0) CHECK(m.sigma_min == doctest::Approx(1.0));
  const auto bad = monodromy_invertibility_check(zero, 1.0, 4, false);
  CHECK_FALSE(bad.pass);
  CHECK(std::find(bad.failing.begin(), bad.failing.end(), 0) != bad.failing.end());
  CHECK_THROWS_AS(monodromy_invertibility_check(zero, 1.0, 4, true), ResonanceError);
}

TEST_CASE("Neumann block needs the shift") {
  auto g = make_grid(8, 8);
  const auto L = assemble_neumann_laplacian(g, 1.0);
  const auto r0 = monodromy_invertibility_check(L.matrix, 1.0, 4, false);
  CHECK_FALSE(r0.pass);
  CHECK(r0.failing == std::vector<int>{0});

  SparseMatrix Ls = L.matrix;
  for (Eigen::Index i = 0; i < Ls.rows(); ++i) Ls.coeffRef(i, i) += 1e-3;
  const auto r1 = monodromy_invertibility_check(Ls, 1.0, 4, false);
  CHECK(r1.pass);

  // Dense oracle for a couple of modes.
  const Eigen::MatrixXd D = Eigen::MatrixXd(Ls);
  for (const auto& m : r1.modes) {
    if (std::abs(m.k) > 1) continue;
    const Eigen::MatrixXcd B = D.cast<std::complex<double>>() +
                               std::complex<double>(0, 2 * M_PI * m.k) * Eigen::MatrixXcd::Identity(D.rows(), D.cols());
    CHECK(m.sigma_min == doctest::Approx(oracle::dense_sigma_min(B)).epsilon(1e-6));
  }
}

TEST_CASE("shifted operator passes many modes on the default grid") {
  auto g = make_grid(16, 16);
  PhysParams pp;
  const auto A = assemble_A_eps(State::equilibrium(g, 1.0, 1.0), 1e-3, pp);
  CHECK(monodromy_invertibility_check(A.matrix, 1.0, 64, false).pass);
}

TEST_CASE("pack and unpack round trip") {
  auto g = make_grid(5, 4);
  std::mt19937_64 rng(3);
  const State s = random_state(g, rng, 0.2);
  const State t = unpack(pack(s), g);
  CHECK(t.u.x == s.u.x);
  CHECK(t.h == s.h);
  CHECK(t.a == s.a);
}

TEST_CASE("triplet dump") {
  SparseMatrix A(2, 2);
  A.insert(0, 1) = 2.5;
  std::ostringstream os;
  write_triplets(os, A);
  CHECK(os.str().find("0 1 2.5") != std::string::npos);
}
