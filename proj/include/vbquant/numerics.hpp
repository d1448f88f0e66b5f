#pragma once

// Shared numerical kernels: quadrature, finite differences, fixed-step RK4
// and a scaling-and-squaring matrix exponential used as an oracle.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <type_traits>
#include <vector>

#include "vbquant/error.hpp"

namespace vbquant {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I_unit{0.0, 1.0};

namespace numerics {

/// z^k by repeated multiplication; exact at z = 0 and k = 0.
inline cplx ipow(cplx z, int k) {
  cplx out(1.0, 0.0);
  for (int i = 0; i < k; ++i) out *= z;
  return out;
}

/// Default derivative step for matrix-valued transition data.
inline constexpr double default_difference_step = 1e-5;
/// Default RK4 resolution per unit of path parameter.
inline constexpr std::size_t default_steps_per_unit = 1000;

struct QuadratureRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Product rule on the unit sphere in (t = cos(colatitude), azimuth).
struct QuadratureRule {
  struct Node {
    double t;
    double phi;
  };
  std::vector<Node> nodes;
  std::vector<double> weights;
  std::size_t n_t = 0;
  std::size_t n_phi = 0;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n, ascending.
inline QuadratureRule1D gauss_legendre(std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "gauss_legendre needs n >= 1");
  QuadratureRule1D rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node for the weight
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double kk = static_cast<double>(k);
      const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Gauss-Legendre in t times the uniform trapezoid in azimuth. Exact for
/// t-degree <= 2 n_t - 1 and azimuthal Fourier modes |m| < n_phi.
inline QuadratureRule sphere_rule(std::size_t n_t, std::size_t n_phi) {
  if (n_t == 0 || n_phi == 0) fail(ErrorKind::InvalidArgument, "sphere_rule needs n_t, n_phi >= 1");
  const auto gl = gauss_legendre(n_t);
  QuadratureRule rule;
  rule.n_t = n_t;
  rule.n_phi = n_phi;
  rule.nodes.reserve(n_t * n_phi);
  rule.weights.reserve(n_t * n_phi);
  const double dphi = 2.0 * pi / static_cast<double>(n_phi);
  for (std::size_t i = 0; i < n_t; ++i) {
    for (std::size_t k = 0; k < n_phi; ++k) {
      rule.nodes.push_back({gl.nodes[i], dphi * static_cast<double>(k)});
      rule.weights.push_back(gl.weights[i] * dphi);
    }
  }
  return rule;
}

/// (f(x+h) - f(x-h)) / 2h for scalar- or matrix-valued f.
template <typename F>
auto central_difference(F&& f, double x, double h = default_difference_step) {
  using R = std::decay_t<std::invoke_result_t<F&, double>>;
  if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "central_difference needs h > 0");
  return R((f(x + h) - f(x - h)) / (2.0 * h));
}

/// Right-hand side y' = field(t, y) for matrix-valued states.
using MatrixField = std::function<ComplexMatrix(double, const ComplexMatrix&)>;

inline ComplexMatrix rk4_step(const MatrixField& field, double t, double dt, const ComplexMatrix& y) {
  const ComplexMatrix k1 = field(t, y);
  const ComplexMatrix k2 = field(t + 0.5 * dt, y + (0.5 * dt) * k1);
  const ComplexMatrix k3 = field(t + 0.5 * dt, y + (0.5 * dt) * k2);
  const ComplexMatrix k4 = field(t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Classical RK4 over the given grid; returns the state at the last node.
inline ComplexMatrix rk4_integrate(const MatrixField& field, const ComplexMatrix& y0,
                                   std::span<const double> t_grid) {
  if (t_grid.size() < 2) fail(ErrorKind::InvalidArgument, "rk4_integrate needs at least two grid points");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) fail(ErrorKind::InvalidArgument, "rk4_integrate needs an increasing grid");
  }
  ComplexMatrix y = y0;
  for (std::size_t i = 1; i < t_grid.size(); ++i) y = rk4_step(field, t_grid[i - 1], t_grid[i] - t_grid[i - 1], y);
  return y;
}

inline std::vector<double> uniform_grid(double t0, double t1, std::size_t steps) {
  if (steps == 0) fail(ErrorKind::InvalidArgument, "uniform_grid needs at least one step");
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    grid[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(steps);
  grid.back() = t1;
  return grid;
}

/// Largest singular value.
inline double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

inline double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// exp(M) by scaling and squaring around a truncated Taylor series. Intended
/// as an oracle; series truncation at relative 1e-12 or finer.
inline ComplexMatrix matrix_exp(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::InvalidArgument, "matrix_exp needs a square matrix");
  const auto n = m.rows();
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const ComplexMatrix scaled = m / std::ldexp(1.0, squarings);

  ComplexMatrix result = ComplexMatrix::Identity(n, n);
  ComplexMatrix term = ComplexMatrix::Identity(n, n);
  for (int k = 1; k < 40; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace numerics
}  // namespace vbquant
