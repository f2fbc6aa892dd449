#pragma once

#include <array>

#include <Eigen/Dense>

namespace hibler {

using Tensor2 = Eigen::Matrix2d;

struct RheologyParams {
  double e = 2.0;         // yield-ellipse axis ratio, > 1
  double delta = 1e-6;    // regularization of the deformation measure, > 0
  double pstar = 1.0;     // ice strength constant, > 0
  double c_press = 20.0;  // compactness decay constant, > 0

  void validate() const;
};

/// Deformation measure
///   (e11^2 + e22^2)(1 + 1/e^2) + (4/e^2) e12^2 + 2 e11 e22 (1 - 1/e^2).
double delta_squared(const Tensor2& eps, double e);

/// sqrt(delta + delta_squared(eps)); never below sqrt(delta).
double delta_delta(const Tensor2& eps, const RheologyParams& p);

/// Linear map encoding the elliptic yield curve, applied entry-wise to a
/// general 2x2 matrix (off-diagonals use eps12 + eps21).
Tensor2 s_map(const Tensor2& eps, double e);

/// Constant fourth-order tensor of s_map indexed so that
/// (S G)_{ik} = sum_{j,l} s_tensor(i, j, k, l) * G_{jl} with G_{jl} = d_l u_j.
/// Indices are zero-based.
double s_tensor(int i, int j, int k, int l, double e);

struct Pressure {
  double value;
  double d_dh;
  double d_da;
};

/// P = p* h exp(-c (1 - a)) and its partial derivatives.
Pressure pressure(double h, double a, const RheologyParams& p);

/// S_delta = (P / 2) * S(eps) / Delta_delta(eps).
Tensor2 stress_s_delta(const Tensor2& eps, double P, const RheologyParams& p);

/// sigma_delta = 2 eta eps + (zeta - eta) tr(eps) I - (P/2) I with
/// zeta = P / (2 Delta_delta), eta = zeta / e^2.
Tensor2 stress_sigma_delta(const Tensor2& eps, double P, const RheologyParams& p);

/// Principal-part coefficients a_ij^kl of the Hibler operator at one node.
struct CoeffTensor {
  std::array<double, 16> entries{};

  double operator()(int i, int j, int k, int l) const { return entries[slot(i, j, k, l)]; }
  double& operator()(int i, int j, int k, int l) { return entries[slot(i, j, k, l)]; }

  static constexpr int slot(int i, int j, int k, int l) { return ((i * 2 + j) * 2 + k) * 2 + l; }
};

/// a_ij^kl = (P / (2 D)) (S_ij^kl - (S eps)_ik (S eps)_jl / D^2), D = Delta_delta(eps),
/// with eps the symmetric part of grad_u (grad_u(j, l) = d_l u_j).
CoeffTensor coeff_tensor(const Tensor2& grad_u, double P, const RheologyParams& p);

}  // namespace hibler
