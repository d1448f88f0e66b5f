#pragma once

// su(2) in the anti-Hermitian normalization tau_a = -(i/2) sigma_a, so that
// [tau_1, tau_2] = tau_3 and tr(tau_a tau_b) = -delta_ab / 2.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

#include "vbquant/error.hpp"
#include "vbquant/numerics.hpp"

namespace vbquant::su2 {

using Matrix2 = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;

inline Matrix2 tau(int a) {
  Matrix2 m = Matrix2::Zero();
  const cplx h(0.0, -0.5);
  switch (a) {
    case 0: m << 0, h, h, 0; break;
    case 1: m << 0, cplx(-0.5, 0), cplx(0.5, 0), 0; break;
    case 2: m << h, 0, 0, -h; break;
    default: fail(ErrorKind::InvalidArgument, "su(2) generator index must be 0, 1 or 2");
  }
  return m;
}

inline Matrix2 from_coefficients(const Vec3& c) { return c(0) * tau(0) + c(1) * tau(1) + c(2) * tau(2); }

/// Inverse of from_coefficients on the traceless anti-Hermitian part.
inline Vec3 coefficients(const Matrix2& m) {
  Vec3 c;
  for (int a = 0; a < 3; ++a) c(a) = -2.0 * (tau(a) * m).trace().real();
  return c;
}

/// exp(c . tau) in closed form: cos(|c|/2) I + sin(|c|/2) (c/|c|) . (2 tau).
inline Matrix2 exp_coefficients(const Vec3& c) {
  const double angle = c.norm();
  if (angle < 1e-300) return Matrix2::Identity();
  const double half = 0.5 * angle;
  return std::cos(half) * Matrix2::Identity() + (2.0 * std::sin(half) / angle) * from_coefficients(c);
}

inline bool is_special_unitary(const Matrix2& g, double tol = 1e-10) {
  return std::abs(g.determinant() - cplx(1.0, 0.0)) <= tol &&
         (g.adjoint() * g - Matrix2::Identity()).cwiseAbs().maxCoeff() <= tol;
}

/// Haar-distributed element from a unit quaternion.
template <typename Rng>
Matrix2 random_element(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Vector4d q(normal(rng), normal(rng), normal(rng), normal(rng));
  q.normalize();
  const cplx a(q(0), q(1));
  const cplx b(q(2), q(3));
  Matrix2 g;
  g << a, b, -std::conj(b), std::conj(a);
  return g;
}

}  // namespace vbquant::su2
