#pragma once

// The quantum fiber: holomorphic sections of the degree-2j line bundle over
// the orbit, represented in the North chart by polynomials of degree <= 2j
// with the measure dnu = ((2j+1)/pi) (1+|z|^2)^-(2j+2) dA.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "vbquant/error.hpp"
#include "vbquant/numerics.hpp"
#include "vbquant/orbit.hpp"
#include "vbquant/su2.hpp"

namespace vbquant::fiber {

using orbit::ChartPoint;
using orbit::FiberHamiltonian;
using orbit::OrbitGeometry;
using orbit::OrbitSpec;
using numerics::QuadratureRule;

/// Tolerance for the quadrature Gram against the Beta-integral closed form.
inline constexpr double gram_tolerance = 1e-8;
/// Hermiticity tolerance enforced while assembling O(w).
inline constexpr double hermiticity_tolerance = 1e-8;

/// ||z^k||^2 = (2j+1) B(k+1, 2j+1-k) = 1 / C(2j, k).
inline double monomial_norm_squared(int two_j, int k) {
  return std::exp(std::lgamma(k + 1.0) + std::lgamma(two_j - k + 1.0) - std::lgamma(two_j + 1.0));
}

/// Default rule: resolves azimuthal modes up to 4j+8 and t-degree 4j+15.
inline QuadratureRule default_rule(const OrbitSpec& spec) {
  return numerics::sphere_rule(static_cast<std::size_t>(spec.two_j + 8),
                               static_cast<std::size_t>(2 * spec.two_j + 9));
}

struct FiberBasis {
  OrbitSpec spec;
  std::vector<double> norms;  // ||z^k|| by quadrature
  ComplexMatrix gram;         // monomial Gram matrix by quadrature
  std::size_t n_t = 0;
  std::size_t n_phi = 0;

  int dimension() const { return spec.dimension(); }

  /// Orthonormal section phi_k(z) = z^k / ||z^k|| in the North chart.
  cplx value(int k, cplx z) const { return numerics::ipow(z, k) / norms[static_cast<std::size_t>(k)]; }
  cplx derivative(int k, cplx z) const {
    if (k == 0) return {0.0, 0.0};
    return static_cast<double>(k) * numerics::ipow(z, k - 1) / norms[static_cast<std::size_t>(k)];
  }
};

/// Row vector of orthonormal coefficients.
struct FiberSection {
  ComplexVector coefficients;
};

struct PrequantOperator {
  ComplexMatrix matrix;  // matrix(nu, mu) = <<phi_nu | O(w) phi_mu>>
};

struct QuantizedTransition {
  su2::Matrix2 group_element;
  ComplexMatrix matrix;  // X(mu, sigma): phi_mu(g.z) (with automorphy) = X(mu, sigma) phi_sigma(z)
};

/// Quadrature nodes mapped to the North chart with the weights of dnu and the
/// orthonormal sections tabulated once.
class FiberSampler {
 public:
  FiberSampler(const FiberBasis& basis, const QuadratureRule& rule) : spec_(basis.spec) {
    const std::size_t count = rule.size();
    const int n = basis.dimension();
    const double j = basis.spec.j();
    points_.reserve(count);
    weights_.resize(count);
    values_.resize(n, static_cast<Eigen::Index>(count));
    derivatives_.resize(n, static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
      const auto& node = rule.nodes[i];
      const ChartPoint pt = orbit::point_from_sphere(node.t, node.phi);
      points_.push_back(pt);
      // dnu = (2j+1)/(4 pi) (1+|z|^2)^-2j dOmega
      weights_[i] = rule.weights[i] * (2.0 * j + 1.0) / (4.0 * pi) * std::pow(0.5 * (1.0 + node.t), basis.spec.two_j);
      for (int k = 0; k < n; ++k) {
        values_(k, static_cast<Eigen::Index>(i)) = basis.value(k, pt.z);
        derivatives_(k, static_cast<Eigen::Index>(i)) = basis.derivative(k, pt.z);
      }
    }
  }

  std::size_t size() const { return points_.size(); }
  const ChartPoint& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const ComplexMatrix& values() const { return values_; }
  const ComplexMatrix& derivatives() const { return derivatives_; }

  /// <<f | g>> for sampled functions (rows indexed by nodes).
  ComplexMatrix inner(const ComplexMatrix& bra, const ComplexMatrix& ket) const {
    ComplexMatrix weighted = ket;
    for (std::size_t i = 0; i < size(); ++i) weighted.col(static_cast<Eigen::Index>(i)) *= weights_[i];
    return bra.conjugate() * weighted.transpose();
  }

  /// Samples of O(w) phi_mu, one row per basis index.
  ComplexMatrix apply_prequant(const OrbitGeometry& geom, const FiberHamiltonian& w) const {
    ComplexMatrix out(values_.rows(), values_.cols());
    for (std::size_t i = 0; i < size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      const ChartPoint& pt = points_[i];
      const orbit::ChartTangent field = orbit::hamiltonian_field(geom, w, pt);
      const cplx dz_field(field.x(), field.y());
      const cplx theta_field = orbit::kahler_potential_at(geom, pt)(field);
      const double wv = w(pt);
      // O(w) phi = -i H_w(phi) - theta(H_w) phi + w phi, with H_w(phi) = dz(H_w) phi' on holomorphic phi
      out.col(col) = (-I_unit * dz_field) * derivatives_.col(col) + (wv - theta_field) * values_.col(col);
    }
    return out;
  }

 private:
  OrbitSpec spec_;
  std::vector<ChartPoint> points_;
  std::vector<double> weights_;
  ComplexMatrix values_;
  ComplexMatrix derivatives_;
};

inline FiberBasis build_basis(const OrbitSpec& spec, const QuadratureRule& rule) {
  const int n = spec.dimension();
  FiberBasis basis{spec, std::vector<double>(static_cast<std::size_t>(n), 1.0), ComplexMatrix(n, n), rule.n_t,
                   rule.n_phi};
  // with unit norms the sampler tabulates raw monomials
  const FiberSampler raw(basis, rule);
  basis.gram = raw.inner(raw.values(), raw.values());
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const double expected = k == l ? monomial_norm_squared(spec.two_j, k) : 0.0;
      const double deviation = std::abs(basis.gram(k, l) - expected);
      if (deviation > gram_tolerance * std::max(1.0, expected))
        fail(ErrorKind::AccuracyFailure, "quadrature rule under-resolves the fiber Gram matrix");
    }
    basis.norms[static_cast<std::size_t>(k)] = std::sqrt(basis.gram(k, k).real());
  }
  return basis;
}

inline FiberBasis build_basis(const OrbitSpec& spec) { return build_basis(spec, default_rule(spec)); }

inline QuadratureRule basis_rule(const FiberBasis& basis) { return numerics::sphere_rule(basis.n_t, basis.n_phi); }

inline PrequantOperator prequant_matrix(const OrbitGeometry& geom, const FiberSampler& sampler,
                                        const FiberHamiltonian& w) {
  PrequantOperator op{sampler.inner(sampler.values(), sampler.apply_prequant(geom, w))};
  if (numerics::max_abs(op.matrix - op.matrix.adjoint()) > hermiticity_tolerance)
    fail(ErrorKind::AccuracyFailure, "prequantization matrix is not Hermitian within tolerance");
  return op;
}

inline PrequantOperator prequant_matrix(const OrbitGeometry& geom, const FiberBasis& basis,
                                        const FiberHamiltonian& w, const QuadratureRule& rule) {
  return prequant_matrix(geom, FiberSampler(basis, rule), w);
}

/// Largest dnu-norm of the component of O(w) phi_mu orthogonal to the
/// polarized sections, over all basis columns.
inline double polarization_residual(const OrbitGeometry& geom, const FiberSampler& sampler,
                                    const FiberHamiltonian& w) {
  const ComplexMatrix applied = sampler.apply_prequant(geom, w);
  const ComplexMatrix coefficients = sampler.inner(sampler.values(), applied);  // (nu, mu)
  const ComplexMatrix leak = applied - coefficients.transpose() * sampler.values();
  double worst = 0.0;
  for (Eigen::Index mu = 0; mu < leak.rows(); ++mu) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < sampler.size(); ++i)
      norm2 += sampler.weight(i) * std::norm(leak(mu, static_cast<Eigen::Index>(i)));
    worst = std::max(worst, std::sqrt(norm2));
  }
  return worst;
}

inline double polarization_residual(const OrbitGeometry& geom, const FiberBasis& basis, const FiberHamiltonian& w,
                                    const QuadratureRule& rule) {
  return polarization_residual(geom, FiberSampler(basis, rule), w);
}

/// Substitution by the Moebius action lifted with the factor of automorphy:
/// p(z) -> (-conj(b) z + conj(a))^{2j} p((a z + b) / (-conj(b) z + conj(a))).
inline QuantizedTransition quantize_transition(const FiberSampler& sampler, const FiberBasis& basis,
                                               const su2::Matrix2& g) {
  if (!su2::is_special_unitary(g)) fail(ErrorKind::InvalidArgument, "transition must be special unitary");
  const int n = basis.dimension();
  const int two_j = basis.spec.two_j;
  const cplx a = g(0, 0);
  const cplx b = g(0, 1);
  const cplx c = g(1, 0);
  const cplx d = g(1, 1);
  ComplexMatrix moved(n, static_cast<Eigen::Index>(sampler.size()));
  for (std::size_t i = 0; i < sampler.size(); ++i) {
    const cplx z = sampler.point(i).z;
    const cplx num = a * z + b;
    const cplx den = c * z + d;
    for (int k = 0; k < n; ++k)
      moved(k, static_cast<Eigen::Index>(i)) =
          numerics::ipow(num, k) * numerics::ipow(den, two_j - k) / basis.norms[static_cast<std::size_t>(k)];
  }
  // inner(values, moved)(sigma, mu) = <<phi_sigma | T phi_mu>>
  return {g, sampler.inner(sampler.values(), moved).transpose()};
}

inline QuantizedTransition quantize_transition(const FiberBasis& basis, const su2::Matrix2& g) {
  return quantize_transition(FiberSampler(basis, basis_rule(basis)), basis, g);
}

}  // namespace vbquant::fiber
