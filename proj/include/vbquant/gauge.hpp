#pragma once

// The bundle layer over B = T*Q: Yang-Mills chart data, the orbit function
// w = <xi, a(v)>, horizontal lifts, and the induced connection on the
// quantum fiber computed two ways (quadrature of O(w), and rho(a(v))).

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "vbquant/error.hpp"
#include "vbquant/fiber.hpp"
#include "vbquant/numerics.hpp"
#include "vbquant/orbit.hpp"
#include "vbquant/su2.hpp"

namespace vbquant::gauge {

using orbit::ChartPoint;
using orbit::FiberHamiltonian;
using orbit::OrbitGeometry;
using orbit::OrbitSpec;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Largest polarization residual accepted when a model is constructed.
inline constexpr double minimal_coupling_tolerance = 1e-6;
/// Anti-Hermiticity tolerance enforced on assembled connection values.
inline constexpr double anti_hermiticity_tolerance = 1e-8;
/// Step of the five-point stencil for rho(tau_a) = d/dt X(exp(t tau_a)) at t = 0.
inline constexpr double representation_step = 1e-3;

enum class BaseKind { Plane, Sphere };

/// Plane models: Primary is the reference gauge, Secondary the transformed
/// one. Sphere models: Primary = North (theta < pi), Secondary = South.
enum class BaseChart { Primary, Secondary };

inline std::string_view to_string(BaseChart chart) { return chart == BaseChart::Primary ? "primary" : "secondary"; }

struct BasePoint {
  BaseChart chart = BaseChart::Primary;
  Vec2 q = Vec2::Zero();
  Vec2 p = Vec2::Zero();
};

struct BaseTangent {
  Vec2 dq = Vec2::Zero();
  Vec2 dp = Vec2::Zero();
};

/// Su(2)-valued coefficients of a_1 dq_1 + a_2 dq_2 (or of dp_1, dp_2).
using Potential = std::array<su2::Matrix2, 2>;

struct GaugeModel {
  std::string name;
  OrbitSpec orbit{0};
  BaseKind base = BaseKind::Plane;
  std::function<Potential(BaseChart, const Vec2&)> potential;
  /// g_ij(q) from Primary to Secondary; empty for single-chart models.
  std::function<su2::Matrix2(const Vec2&)> transition;
  /// Sign selects the preferred chart on auto-charted paths (>= 0: Primary).
  std::function<double(const Vec2&)> chart_boundary;
  /// Optional dp-coupling; only custom models set it.
  std::function<Potential(BaseChart, const Vec2&)> momentum_potential;
  /// Optional extra fiber function added to the orbit function. Anything
  /// outside span{1, H_a} is refused by validate_minimal_coupling.
  std::function<FiberHamiltonian(const BasePoint&, const BaseTangent&)> fiber_coupling;

  bool has_overlap() const { return static_cast<bool>(transition); }

  bool in_chart(BaseChart chart, const Vec2& q) const {
    if (chart == BaseChart::Secondary && !has_overlap()) return false;
    if (base == BaseKind::Plane) return q.allFinite();
    const double theta = q(0);
    if (!(theta >= 0.0 && theta <= pi)) return false;
    return chart == BaseChart::Primary ? theta < pi : theta > 0.0;
  }

  void require_chart(const BasePoint& b) const {
    if (!in_chart(b.chart, b.q))
      fail(ErrorKind::ChartError, "base point outside chart '" + std::string(to_string(b.chart)) + "' of model " + name);
  }

  /// a(v) = a_k dq_k (+ momentum coupling) at b.
  su2::Matrix2 potential_value(const BasePoint& b, const BaseTangent& v) const {
    require_chart(b);
    const Potential a = potential(b.chart, b.q);
    su2::Matrix2 out = v.dq(0) * a[0] + v.dq(1) * a[1];
    if (momentum_potential) {
      const Potential m = momentum_potential(b.chart, b.q);
      out += v.dp(0) * m[0] + v.dp(1) * m[1];
    }
    return out;
  }
};

/// Pairing of alpha_B = p . dq with v.
inline double canonical_one_form(const BasePoint& b, const BaseTangent& v) { return b.p.dot(v.dq); }

/// w(f) = <xi(f), a(v)> with xi the coadjoint coordinate of the orbit point.
inline FiberHamiltonian orbit_function(const GaugeModel& model, const BasePoint& b, const BaseTangent& v) {
  Vec3 direction = su2::coefficients(model.potential_value(b, v));
  direction = orbit::coadjoint_coordinate(direction);  // xi . c = x . (P c)
  FiberHamiltonian w = orbit::moment_hamiltonian(model.orbit, direction);
  if (model.fiber_coupling) w = w + model.fiber_coupling(b, v);
  return w;
}

struct LiftedTangent {
  BaseTangent base;
  orbit::ChartTangent fiber = orbit::ChartTangent::Zero();
};

/// v# = v - H_w with w the orbit function of v.
inline LiftedTangent horizontal_lift(const GaugeModel& model, const OrbitGeometry& geom, const BasePoint& b,
                                     const BaseTangent& v, const ChartPoint& f) {
  const FiberHamiltonian w = orbit_function(model, b, v);
  return {v, -orbit::hamiltonian_field(geom, w, f)};
}

/// Coordinates (q1, q2, p1, p2, x, y) on U x F; (x, y) belong to one fiber chart.
using TotalVector = Eigen::Matrix<double, 6, 1>;
using TotalCovector = Eigen::Matrix<cplx, 6, 1>;

inline TotalVector to_total(const LiftedTangent& u) {
  TotalVector out;
  out << u.base.dq, u.base.dp, u.fiber;
  return out;
}

/// chi*alpha_E = p . dq + theta_F + <xi(f), a_k(q)> dq_k (+ dp coupling).
inline TotalCovector total_one_form(const GaugeModel& model, const OrbitGeometry& geom, BaseChart chart,
                                    orbit::FiberChart fiber_chart, const TotalVector& x) {
  const BasePoint b{chart, x.segment<2>(0), x.segment<2>(2)};
  const ChartPoint f{fiber_chart, cplx(x(4), x(5))};
  const Vec3 xi = orbit::coadjoint_coordinate(orbit::embed_point(model.orbit, f));
  const Potential a = model.potential(chart, b.q);
  TotalCovector alpha = TotalCovector::Zero();
  for (int k = 0; k < 2; ++k) alpha(k) = b.p(k) + xi.dot(su2::coefficients(a[static_cast<std::size_t>(k)]));
  if (model.momentum_potential) {
    const Potential m = model.momentum_potential(chart, b.q);
    for (int k = 0; k < 2; ++k) alpha(2 + k) = xi.dot(su2::coefficients(m[static_cast<std::size_t>(k)]));
  }
  const cplx theta = orbit::kahler_potential_at(geom, f).dz_coefficient;
  alpha(4) = theta;
  alpha(5) = I_unit * theta;
  return alpha;
}

/// chi*Omega_E = d(chi*alpha_E) at (b, f) by central differences.
inline Eigen::Matrix<cplx, 6, 6> total_symplectic_form(const GaugeModel& model, const OrbitGeometry& geom,
                                                       const BasePoint& b, const ChartPoint& f,
                                                       double h = numerics::default_difference_step) {
  model.require_chart(b);
  TotalVector x;
  x << b.q, b.p, f.z.real(), f.z.imag();
  Eigen::Matrix<cplx, 6, 6> jac;  // jac(a, c) = d_a alpha_c
  for (int a = 0; a < 6; ++a) {
    TotalVector shift = TotalVector::Zero();
    shift(a) = h;
    jac.row(a) = ((total_one_form(model, geom, b.chart, f.chart, x + shift) -
                   total_one_form(model, geom, b.chart, f.chart, x - shift)) / (2.0 * h)).transpose();
  }
  return jac - jac.transpose();
}

/// |chi*Omega_E(v#, xi)| for a vertical chart vector xi.
inline double lift_orthogonality_residual(const GaugeModel& model, const OrbitGeometry& geom, const BasePoint& b,
                                          const BaseTangent& v, const ChartPoint& f,
                                          const orbit::ChartTangent& vertical) {
  const TotalVector lifted = to_total(horizontal_lift(model, geom, b, v, f));
  TotalVector xi = TotalVector::Zero();
  xi.segment<2>(4) = vertical;
  const auto omega = total_symplectic_form(model, geom, b, f);
  return std::abs(lifted.cast<cplx>().dot(omega * xi.cast<cplx>()));
}

struct ConnectionMatrix {
  ComplexMatrix value;
};

/// rho(tau_a), a = 0, 1, 2, as anti-Hermitian matrices on the fiber.
struct LieAlgebraRep {
  std::array<ComplexMatrix, 3> generators;

  ComplexMatrix operator()(const su2::Matrix2& a) const {
    const Vec3 c = su2::coefficients(a);
    return c(0) * generators[0] + c(1) * generators[1] + c(2) * generators[2];
  }
};

/// Differentiates the quantized transitions along one-parameter subgroups.
inline LieAlgebraRep build_rep(const fiber::FiberSampler& sampler, const fiber::FiberBasis& basis) {
  LieAlgebraRep rep;
  for (int a = 0; a < 3; ++a) {
    const auto curve = [&](double t) {
      Vec3 c = Vec3::Zero();
      c(a) = t;
      return fiber::quantize_transition(sampler, basis, su2::exp_coefficients(c)).matrix;
    };
    const double h = representation_step;
    rep.generators[static_cast<std::size_t>(a)] =
        (8.0 * (curve(h) - curve(-h)) - (curve(2 * h) - curve(-2 * h))) / (12.0 * h);
  }
  return rep;
}

inline ConnectionMatrix connection_quadrature(const GaugeModel& model, const OrbitGeometry& geom,
                                              const fiber::FiberSampler& sampler, const BasePoint& b,
                                              const BaseTangent& v) {
  const FiberHamiltonian w = orbit_function(model, b, v);
  // [A v](mu, nu) = i <<phi_nu | O(w) phi_mu>>
  ConnectionMatrix a{I_unit * fiber::prequant_matrix(geom, sampler, w).matrix.transpose()};
  if (numerics::max_abs(a.value + a.value.adjoint()) > anti_hermiticity_tolerance)
    fail(ErrorKind::AccuracyFailure, "connection value is not anti-Hermitian within tolerance");
  return a;
}

inline ConnectionMatrix connection_rep(const GaugeModel& model, const LieAlgebraRep& rep, const BasePoint& b,
                                       const BaseTangent& v) {
  return {rep(model.potential_value(b, v))};
}

enum class ConnectionSource { Representation, Quadrature };

inline std::string_view to_string(ConnectionSource s) { return s == ConnectionSource::Representation ? "rep" : "quad"; }

/// Geometry, basis, sampler and rho for one model, built once.
class ConnectionEvaluator {
 public:
  explicit ConnectionEvaluator(const GaugeModel& model)
      : ConnectionEvaluator(model, fiber::default_rule(model.orbit)) {}

  ConnectionEvaluator(GaugeModel model, numerics::QuadratureRule rule)
      : model_(std::move(model)),
        geom_(model_.orbit),
        rule_(std::move(rule)),
        basis_(fiber::build_basis(model_.orbit, rule_)),
        sampler_(basis_, rule_),
        rep_(build_rep(sampler_, basis_)) {}

  const GaugeModel& model() const { return model_; }
  const OrbitGeometry& geometry() const { return geom_; }
  const fiber::FiberBasis& basis() const { return basis_; }
  const fiber::FiberSampler& sampler() const { return sampler_; }
  const numerics::QuadratureRule& rule() const { return rule_; }
  const LieAlgebraRep& rep() const { return rep_; }
  int dimension() const { return basis_.dimension(); }

  ComplexMatrix operator()(ConnectionSource source, const BasePoint& b, const BaseTangent& v) const {
    if (source == ConnectionSource::Representation) return connection_rep(model_, rep_, b, v).value;
    return connection_quadrature(model_, geom_, sampler_, b, v).value;
  }

  ComplexMatrix transition(const Vec2& q) const {
    if (!model_.has_overlap()) fail(ErrorKind::ChartError, "model " + model_.name + " has no chart transition");
    return fiber::quantize_transition(sampler_, basis_, model_.transition(q)).matrix;
  }

 private:
  GaugeModel model_;
  OrbitGeometry geom_;
  numerics::QuadratureRule rule_;
  fiber::FiberBasis basis_;
  fiber::FiberSampler sampler_;
  LieAlgebraRep rep_;
};

/// ||A^j v - X A^i v X^-1 - (v X) X^-1|| on a chart overlap, with both A by
/// quadrature and v X by central differences of the quantized transition.
inline double gauge_residual(const ConnectionEvaluator& eval, const Vec2& q, const Vec2& p, const BaseTangent& v,
                             double h = numerics::default_difference_step) {
  const GaugeModel& model = eval.model();
  if (!model.has_overlap() || !model.in_chart(BaseChart::Primary, q) || !model.in_chart(BaseChart::Secondary, q))
    fail(ErrorKind::ChartError, "base point is not in a registered chart overlap");
  const ComplexMatrix a_i = eval(ConnectionSource::Quadrature, {BaseChart::Primary, q, p}, v);
  const ComplexMatrix a_j = eval(ConnectionSource::Quadrature, {BaseChart::Secondary, q, p}, v);
  const ComplexMatrix x = eval.transition(q);
  const ComplexMatrix x_inv = x.inverse();
  const ComplexMatrix dx = numerics::central_difference([&](double s) { return eval.transition(q + s * v.dq); }, 0.0, h);
  return numerics::operator_norm(a_j - x * a_i * x_inv - dx * x_inv);
}

/// F(v1, v2) = v1(A(v2)) - v2(A(v1)) + [A(v1), A(v2)] for constant coordinate
/// fields, matching the small-loop expansion of the row-vector transport.
inline ComplexMatrix curvature(const GaugeModel& model, const LieAlgebraRep& rep, const BasePoint& b,
                               const BaseTangent& v1, const BaseTangent& v2,
                               double h = numerics::default_difference_step) {
  const auto along = [&](const BaseTangent& dir, const BaseTangent& arg) {
    return numerics::central_difference(
        [&](double s) {
          const BasePoint moved{b.chart, b.q + s * dir.dq, b.p + s * dir.dp};
          return connection_rep(model, rep, moved, arg).value;
        },
        0.0, h);
  };
  const ComplexMatrix a1 = connection_rep(model, rep, b, v1).value;
  const ComplexMatrix a2 = connection_rep(model, rep, b, v2).value;
  return along(v1, v2) - along(v2, v1) + (a1 * a2 - a2 * a1);
}

/// Refuses models whose orbit functions leave the polarization; the
/// minimal-coupling condition is enforced rather than assumed.
inline void validate_minimal_coupling(const GaugeModel& model) {
  const OrbitGeometry geom(model.orbit);
  const auto basis = fiber::build_basis(model.orbit);
  const fiber::FiberSampler sampler(basis, fiber::default_rule(model.orbit));
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> colatitude(0.2, pi - 0.2);
  for (int sample = 0; sample < 4; ++sample) {
    BasePoint b;
    b.q = model.base == BaseKind::Sphere ? Vec2(colatitude(rng), pi * unit(rng)) : Vec2(unit(rng), unit(rng));
    b.p = Vec2(unit(rng), unit(rng));
    for (const BaseChart chart : {BaseChart::Primary, BaseChart::Secondary}) {
      if (!model.in_chart(chart, b.q)) continue;
      b.chart = chart;
      const BaseTangent v{Vec2(unit(rng), unit(rng)), Vec2(unit(rng), unit(rng))};
      const double residual = fiber::polarization_residual(geom, sampler, orbit_function(model, b, v));
      if (residual > minimal_coupling_tolerance)
        fail(ErrorKind::ConfigurationError,
             "model " + model.name + " violates the minimal-coupling condition (residual " + std::to_string(residual) + ")");
    }
  }
}

// --- built-in models ---------------------------------------------------

inline GaugeModel trivial_model(OrbitSpec spec) {
  GaugeModel m;
  m.name = "trivial";
  m.orbit = spec;
  m.potential = [](BaseChart, const Vec2&) { return Potential{su2::Matrix2::Zero(), su2::Matrix2::Zero()}; };
  validate_minimal_coupling(m);
  return m;
}

/// a = (c_1 . tau) dq_1 + (c_2 . tau) dq_2 over the plane.
inline GaugeModel constant_model(OrbitSpec spec, const Vec3& c1, const Vec3& c2) {
  GaugeModel m;
  m.name = "constant";
  m.orbit = spec;
  const Potential a{su2::from_coefficients(c1), su2::from_coefficients(c2)};
  m.potential = [a](BaseChart, const Vec2&) { return a; };
  validate_minimal_coupling(m);
  return m;
}

/// Embedded monopole on S^2 in (theta, phi): North s(1 - cos theta) tau_3 dphi,
/// South s(-1 - cos theta) tau_3 dphi, g_NS(phi) = exp(-2 s phi tau_3).
inline GaugeModel monopole_model(OrbitSpec spec, int sign) {
  if (sign != 1 && sign != -1) fail(ErrorKind::InvalidArgument, "monopole sign must be +1 or -1");
  GaugeModel m;
  m.name = "monopole";
  m.orbit = spec;
  m.base = BaseKind::Sphere;
  const double s = sign;
  m.potential = [s](BaseChart chart, const Vec2& q) {
    const double c = std::cos(q(0));
    const double strength = chart == BaseChart::Primary ? s * (1.0 - c) : s * (-1.0 - c);
    return Potential{su2::Matrix2::Zero(), strength * su2::tau(2)};
  };
  m.transition = [s](const Vec2& q) { return su2::exp_coefficients(Vec3(0.0, 0.0, -2.0 * s * q(1))); };
  m.chart_boundary = [](const Vec2& q) { return std::cos(q(0)); };
  validate_minimal_coupling(m);
  return m;
}

/// Zero potential in the Primary chart; in the Secondary chart the gauge
/// transform by g(q) = exp(q_1 u . tau) exp(q_2 v . tau), i.e. a = dg g^-1.
inline GaugeModel pure_gauge_model(OrbitSpec spec, const Vec3& u, const Vec3& v) {
  GaugeModel m;
  m.name = "pure_gauge";
  m.orbit = spec;
  const su2::Matrix2 big_u = su2::from_coefficients(u);
  const su2::Matrix2 big_v = su2::from_coefficients(v);
  m.potential = [u, big_u, big_v](BaseChart chart, const Vec2& q) {
    if (chart == BaseChart::Primary) return Potential{su2::Matrix2::Zero(), su2::Matrix2::Zero()};
    const su2::Matrix2 e = su2::exp_coefficients(q(0) * u);
    return Potential{big_u, e * big_v * e.adjoint()};
  };
  m.transition = [u, v](const Vec2& q) {
    return su2::Matrix2(su2::exp_coefficients(q(0) * u) * su2::exp_coefficients(q(1) * v));
  };
  validate_minimal_coupling(m);
  return m;
}

/// Single-chart model over the plane from an arbitrary potential.
inline GaugeModel custom_model(
    OrbitSpec spec, std::string name, std::function<Potential(const Vec2&)> potential,
    std::function<Potential(const Vec2&)> momentum_potential = {},
    std::function<FiberHamiltonian(const BasePoint&, const BaseTangent&)> fiber_coupling = {}) {
  GaugeModel m;
  m.name = std::move(name);
  m.orbit = spec;
  m.potential = [potential](BaseChart, const Vec2& q) { return potential(q); };
  if (momentum_potential)
    m.momentum_potential = [momentum_potential](BaseChart, const Vec2& q) { return momentum_potential(q); };
  m.fiber_coupling = std::move(fiber_coupling);
  validate_minimal_coupling(m);
  return m;
}

}  // namespace vbquant::gauge
