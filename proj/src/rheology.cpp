#include "hibler/rheology.hpp"

#include <cmath>

#include "hibler/errors.hpp"

namespace hibler {

void RheologyParams::validate() const {
  if (!(e > 1.0)) fail(ErrorKind::config, "rheology: e must exceed 1");
  if (!(delta > 0.0)) fail(ErrorKind::config, "rheology: delta must be positive");
  if (!(pstar > 0.0)) fail(ErrorKind::config, "rheology: pstar must be positive");
  if (!(c_press > 0.0)) fail(ErrorKind::config, "rheology: c must be positive");
}

double delta_squared(const Tensor2& eps, double e) {
  const double ie2 = 1.0 / (e * e);
  const double e11 = eps(0, 0);
  const double e22 = eps(1, 1);
  const double e12 = eps(0, 1);
  return (e11 * e11 + e22 * e22) * (1.0 + ie2) + 4.0 * ie2 * e12 * e12 +
         2.0 * e11 * e22 * (1.0 - ie2);
}

double delta_delta(const Tensor2& eps, const RheologyParams& p) {
  return std::sqrt(p.delta + delta_squared(eps, p.e));
}

Tensor2 s_map(const Tensor2& eps, double e) {
  const double ie2 = 1.0 / (e * e);
  const double off = ie2 * (eps(0, 1) + eps(1, 0));
  Tensor2 out;
  out(0, 0) = (1.0 + ie2) * eps(0, 0) + (1.0 - ie2) * eps(1, 1);
  out(1, 1) = (1.0 - ie2) * eps(0, 0) + (1.0 + ie2) * eps(1, 1);
  out(0, 1) = off;
  out(1, 0) = off;
  return out;
}

double s_tensor(int i, int j, int k, int l, double e) {
  const double ie2 = 1.0 / (e * e);
  if (i == k) {
    // Diagonal output entry (S G)_ii reads only diagonal G_jj.
    if (j != l) return 0.0;
    return (j == i) ? 1.0 + ie2 : 1.0 - ie2;
  }
  // Off-diagonal output entry reads G_12 + G_21, i.e. (j, l) in {(i, k), (k, i)}.
  if ((j == i && l == k) || (j == k && l == i)) return ie2;
  return 0.0;
}

Pressure pressure(double h, double a, const RheologyParams& p) {
  const double decay = std::exp(-p.c_press * (1.0 - a));
  const double value = p.pstar * h * decay;
  return {value, p.pstar * decay, p.c_press * value};
}

Tensor2 stress_s_delta(const Tensor2& eps, double P, const RheologyParams& p) {
  return (P / (2.0 * delta_delta(eps, p))) * s_map(eps, p.e);
}

Tensor2 stress_sigma_delta(const Tensor2& eps, double P, const RheologyParams& p) {
  const double zeta = P / (2.0 * delta_delta(eps, p));
  const double eta = zeta / (p.e * p.e);
  const double tr = eps.trace();
  return 2.0 * eta * eps + ((zeta - eta) * tr - 0.5 * P) * Tensor2::Identity();
}

CoeffTensor coeff_tensor(const Tensor2& grad_u, double P, const RheologyParams& p) {
  const Tensor2 eps = 0.5 * (grad_u + grad_u.transpose());
  const double D = delta_delta(eps, p);
  const Tensor2 se = s_map(eps, p.e);
  const double scale = P / (2.0 * D);
  const double inv_d2 = 1.0 / (D * D);
  CoeffTensor a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          a(i, j, k, l) = scale * (s_tensor(i, j, k, l, p.e) - inv_d2 * se(i, k) * se(j, l));
  return a;
}

}  // namespace hibler
