// Independent reference computations used by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "hibler/grid.hpp"
#include "hibler/operators.hpp"
#include "hibler/rheology.hpp"

namespace oracle {

using hibler::Tensor2;

// S eps = (2/e^2) eps + (1 - 1/e^2) tr(eps) I for symmetric eps.
inline Tensor2 s_closed(const Tensor2& eps, double e) {
  const double ie2 = 1.0 / (e * e);
  return 2.0 * ie2 * eps + (1.0 - ie2) * eps.trace() * Tensor2::Identity();
}

inline double frob(const Tensor2& a, const Tensor2& b) { return (a.array() * b.array()).sum(); }

// Delta^2 as the quadratic form <S eps, eps>.
inline double delta_sq(const Tensor2& eps, double e) { return frob(s_closed(eps, e), eps); }

inline Tensor2 random_symmetric(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  Tensor2 t;
  t(0, 0) = U(rng);
  t(1, 1) = U(rng);
  t(0, 1) = t(1, 0) = U(rng);
  return t;
}

inline double rel_err(double a, double b) {
  const double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

/// -div S_delta(eps(u), P) at the interior nodes, written out by the chain rule:
///   -(P/2D) sum_k [S d_k eps]_ck + (P/2D^3) sum_k (S eps)_ck <S eps, d_k eps>
///   - (1/2D) sum_k d_k P (S eps)_ck
/// with d_k eps built from compact second differences and d_k P centered.
/// Returns (u1 interior, u2 interior).
inline Eigen::VectorXd stress_divergence(const hibler::State& v, const hibler::RheologyParams& rp) {
  const hibler::Grid2D& g = *v.grid;
  const double hx = g.hx(), hy = g.hy();
  const int n = static_cast<int>(g.interior_count());
  Eigen::VectorXd out(2 * n);
  auto U = [&](int c, int i, int j) { return (c == 0 ? v.u.x : v.u.y)[g.index(i, j)]; };
  auto P = [&](int i, int j) {
    const std::size_t k = g.index(i, j);
    return rp.pstar * v.h[k] * std::exp(-rp.c_press * (1.0 - v.a[k]));
  };
  for (int j = 1; j <= g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      // grad(c, l) = d_l u_c ; hess[k](c, l) = d_k d_l u_c
      Tensor2 grad;
      Tensor2 hess[2];
      for (int c = 0; c < 2; ++c) {
        grad(c, 0) = (U(c, i + 1, j) - U(c, i - 1, j)) / (2 * hx);
        grad(c, 1) = (U(c, i, j + 1) - U(c, i, j - 1)) / (2 * hy);
        const double xx = (U(c, i + 1, j) - 2 * U(c, i, j) + U(c, i - 1, j)) / (hx * hx);
        const double yy = (U(c, i, j + 1) - 2 * U(c, i, j) + U(c, i, j - 1)) / (hy * hy);
        const double xy = (U(c, i + 1, j + 1) - U(c, i + 1, j - 1) - U(c, i - 1, j + 1) + U(c, i - 1, j - 1)) /
                          (4 * hx * hy);
        hess[0](c, 0) = xx;
        hess[0](c, 1) = xy;
        hess[1](c, 0) = xy;
        hess[1](c, 1) = yy;
      }
      const Tensor2 eps = 0.5 * (grad + grad.transpose());
      const Tensor2 Se = s_closed(eps, rp.e);
      const double D = std::sqrt(rp.delta + delta_sq(eps, rp.e));
      const double p0 = P(i, j);
      const double dP[2] = {(P(i + 1, j) - P(i - 1, j)) / (2 * hx), (P(i, j + 1) - P(i, j - 1)) / (2 * hy)};
      for (int c = 0; c < 2; ++c) {
        double r = 0.0;
        for (int k = 0; k < 2; ++k) {
          const Tensor2 deps = 0.5 * (hess[k] + hess[k].transpose());
          const Tensor2 Sd = s_closed(deps, rp.e);
          r += -(p0 / (2 * D)) * Sd(c, k);
          r += (p0 / (2 * D * D * D)) * Se(c, k) * frob(Se, deps);
          r += -(1.0 / (2 * D)) * dP[k] * Se(c, k);
        }
        out[c * n + static_cast<int>(g.interior_index(i, j))] = r;
      }
    }
  }
  return out;
}

/// Writes interior velocity dofs (u1 block then u2 block) into v.
inline void set_velocity(hibler::State& v, const Eigen::VectorXd& x) {
  const hibler::Grid2D& g = *v.grid;
  const int n = static_cast<int>(g.interior_count());
  for (int j = 1; j <= g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      const int r = static_cast<int>(g.interior_index(i, j));
      v.u.x[g.index(i, j)] = x[r];
      v.u.y[g.index(i, j)] = x[n + r];
    }
  }
}

/// Central finite-difference Jacobian-vector product of stress_divergence
/// with respect to the interior velocity at v0.
inline Eigen::VectorXd fd_jacobian_apply(const hibler::State& v0, const hibler::RheologyParams& rp,
                                         const Eigen::VectorXd& w, double s) {
  const hibler::Grid2D& g = *v0.grid;
  const int n = static_cast<int>(g.interior_count());
  Eigen::VectorXd base(2 * n);
  for (int j = 1; j <= g.ny(); ++j) {
    for (int i = 1; i <= g.nx(); ++i) {
      const int r = static_cast<int>(g.interior_index(i, j));
      base[r] = v0.u.x[g.index(i, j)];
      base[n + r] = v0.u.y[g.index(i, j)];
    }
  }
  hibler::State vp = v0, vm = v0;
  set_velocity(vp, base + s * w);
  set_velocity(vm, base - s * w);
  return (stress_divergence(vp, rp) - stress_divergence(vm, rp)) / (2 * s);
}

/// Smallest singular value via a dense SVD (small problems only).
inline double dense_sigma_min(const Eigen::MatrixXcd& B) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
  return svd.singularValues().minCoeff();
}

}  // namespace oracle
