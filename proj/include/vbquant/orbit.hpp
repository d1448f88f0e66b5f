#pragma once

// Classical geometry of the coadjoint orbit of SU(2) of weight j: the sphere
// of radius j with two stereographic charts related by z -> 1/z.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <utility>

#include "vbquant/conventions.hpp"
#include "vbquant/error.hpp"
#include "vbquant/numerics.hpp"

namespace vbquant::orbit {

struct OrbitSpec {
  int two_j = 0;

  explicit OrbitSpec(int twice_weight) : two_j(twice_weight) {
    if (two_j < 0) fail(ErrorKind::InvalidArgument, "two_j must be non-negative");
  }

  double j() const { return 0.5 * two_j; }
  int dimension() const { return two_j + 1; }
};

enum class FiberChart { North, South };

struct ChartPoint {
  FiberChart chart = FiberChart::North;
  cplx z{0.0, 0.0};
};

using ChartTangent = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// A real function on the orbit together with its chart-coordinate gradient
/// (d/dx, d/dy of z = x + iy in the chart the point is given in).
struct FiberHamiltonian {
  std::function<double(const ChartPoint&)> value;
  std::function<ChartTangent(const ChartPoint&)> gradient;

  double operator()(const ChartPoint& pt) const { return value(pt); }

  /// Gradient by central differences, h = 1e-6.
  static FiberHamiltonian from_function(std::function<double(const ChartPoint&)> f) {
    FiberHamiltonian w;
    w.value = f;
    w.gradient = [f](const ChartPoint& pt) {
      constexpr double h = 1e-6;
      const auto shifted = [&](cplx dz) { return f(ChartPoint{pt.chart, pt.z + dz}); };
      return ChartTangent((shifted({h, 0}) - shifted({-h, 0})) / (2 * h),
                          (shifted({0, h}) - shifted({0, -h})) / (2 * h));
    };
    return w;
  }

  static FiberHamiltonian constant(double c) {
    return {[c](const ChartPoint&) { return c; }, [](const ChartPoint&) { return ChartTangent::Zero().eval(); }};
  }
};

inline FiberHamiltonian operator*(const FiberHamiltonian& a, const FiberHamiltonian& b) {
  return {[a, b](const ChartPoint& pt) { return a(pt) * b(pt); },
          [a, b](const ChartPoint& pt) -> ChartTangent {
            return a(pt) * b.gradient(pt) + b(pt) * a.gradient(pt);
          }};
}

inline FiberHamiltonian operator+(const FiberHamiltonian& a, const FiberHamiltonian& b) {
  return {[a, b](const ChartPoint& pt) { return a(pt) + b(pt); },
          [a, b](const ChartPoint& pt) -> ChartTangent { return a.gradient(pt) + b.gradient(pt); }};
}

struct OrbitGeometry {
  OrbitSpec spec;
  int symplectic_sign = conventions::symplectic_sign;

  explicit OrbitGeometry(OrbitSpec s) : spec(s) {}

  /// Density of Omega_F against dx^dy, identical in both charts.
  double symplectic_density(const ChartPoint& pt) const {
    const double d = 1.0 + std::norm(pt.z);
    return symplectic_sign * 4.0 * spec.j() / (d * d);
  }
};

inline Vec3 embed_point(const OrbitSpec& spec, const ChartPoint& pt) {
  const double j = spec.j();
  const double x = pt.z.real();
  const double y = pt.z.imag();
  const double u = x * x + y * y;
  const double d = 1.0 + u;
  if (pt.chart == FiberChart::North) return Vec3(2 * j * x / d, 2 * j * y / d, j * (1 - u) / d);
  return Vec3(2 * j * x / d, -2 * j * y / d, j * (u - 1) / d);
}

inline ChartPoint chart_transition(const ChartPoint& pt) {
  if (pt.z == cplx(0.0, 0.0)) fail(ErrorKind::PoleNotInOverlap, "z = 0 is not in the chart overlap");
  return {pt.chart == FiberChart::North ? FiberChart::South : FiberChart::North, 1.0 / pt.z};
}

/// Point of the North chart over (t = cos colatitude, azimuth).
inline ChartPoint point_from_sphere(double t, double phi) {
  const double r = std::sqrt((1.0 - t) / (1.0 + t));
  return {FiberChart::North, std::polar(r, phi)};
}

inline double symplectic_form_at(const OrbitGeometry& geom, const ChartPoint& pt, const ChartTangent& u1,
                                 const ChartTangent& u2) {
  return geom.symplectic_density(pt) * (u1.x() * u2.y() - u1.y() * u2.x());
}

/// theta = dz_coefficient * dz; the (0,1) part vanishes identically.
struct HolomorphicCovector {
  cplx dz_coefficient{0.0, 0.0};

  cplx operator()(const ChartTangent& u) const { return dz_coefficient * cplx(u.x(), u.y()); }
};

/// Holomorphic-frame potential theta = -i dK with K = 2j ln(1+|z|^2), taken
/// in the chart of pt. d(theta) reproduces Omega_F.
inline HolomorphicCovector kahler_potential_at(const OrbitGeometry& geom, const ChartPoint& pt) {
  const double j = geom.spec.j();
  return {cplx(0.0, -2.0 * j) * std::conj(pt.z) / (1.0 + std::norm(pt.z))};
}

/// Unique H_w with Omega_F(H_w, .) = -d_F w.
inline ChartTangent hamiltonian_field(const OrbitGeometry& geom, const FiberHamiltonian& w, const ChartPoint& pt) {
  if (geom.spec.two_j == 0) return ChartTangent::Zero();
  const ChartTangent grad = w.gradient(pt);
  const double g = geom.symplectic_density(pt);
  return ChartTangent(-grad.y() / g, grad.x() / g);
}

/// H_a = a . x(pt) with analytic chart gradient.
inline FiberHamiltonian moment_hamiltonian(const OrbitSpec& spec, const Vec3& a) {
  FiberHamiltonian w;
  w.value = [spec, a](const ChartPoint& pt) { return a.dot(embed_point(spec, pt)); };
  w.gradient = [spec, a](const ChartPoint& pt) {
    const double j = spec.j();
    const double x = pt.z.real();
    const double y = pt.z.imag();
    const double d = 1.0 + x * x + y * y;
    const double d2 = d * d;
    // columns: d/dx, d/dy of each embedded component in the North chart
    Eigen::Matrix<double, 3, 2> jac;
    jac << 2 * j * (d - 2 * x * x) / d2, -4 * j * x * y / d2,
           -4 * j * x * y / d2, 2 * j * (d - 2 * y * y) / d2,
           -4 * j * x / d2, -4 * j * y / d2;
    if (pt.chart == FiberChart::South) {
      jac.row(1) *= -1.0;
      jac.row(2) *= -1.0;
    }
    return ChartTangent(jac.transpose() * a);
  };
  return w;
}

inline double poisson_bracket(const OrbitGeometry& geom, const FiberHamiltonian& w1, const FiberHamiltonian& w2,
                              const ChartPoint& pt) {
  return symplectic_form_at(geom, pt, hamiltonian_field(geom, w1, pt), hamiltonian_field(geom, w2, pt));
}

/// Coadjoint coordinate of an embedded point in the tau-dual basis.
inline Vec3 coadjoint_coordinate(const Vec3& embedded) {
  Vec3 xi = embedded;
  xi(conventions::coadjoint_reflected_axis) *= -1.0;
  return xi;
}

}  // namespace vbquant::orbit
