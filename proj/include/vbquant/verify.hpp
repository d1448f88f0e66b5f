#pragma once

// Verification suites over a scenario. Each suite returns residuals paired
// with the tolerance they were checked against; sampling is seeded.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "vbquant/conventions.hpp"
#include "vbquant/fiber.hpp"
#include "vbquant/gauge.hpp"
#include "vbquant/report.hpp"
#include "vbquant/scenario.hpp"
#include "vbquant/transport.hpp"

namespace vbquant::verify {

using report::Check;
using scenario::Scenario;
using gauge::Vec2;
using gauge::Vec3;

inline constexpr unsigned seed = 20240601u;

namespace detail {

inline Vec3 random_vec3(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec3(n(rng), n(rng), n(rng));
}

inline orbit::ChartPoint random_fiber_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.0, 2.5);
  std::uniform_real_distribution<double> a(0.0, 2.0 * pi);
  std::bernoulli_distribution south(0.3);
  return {south(rng) ? orbit::FiberChart::South : orbit::FiberChart::North, std::polar(r(rng), a(rng))};
}

inline gauge::BasePoint random_base_point(const gauge::GaugeModel& model, std::mt19937_64& rng, bool allow_secondary) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> theta(0.2, pi - 0.2);
  std::bernoulli_distribution coin(0.5);
  gauge::BasePoint b;
  b.q = model.base == gauge::BaseKind::Sphere ? Vec2(theta(rng), pi * u(rng) / 1.5) : Vec2(u(rng), u(rng));
  b.p = Vec2(u(rng), u(rng));
  if (allow_secondary && model.has_overlap() && coin(rng)) b.chart = gauge::BaseChart::Secondary;
  return b;
}

inline gauge::BaseTangent random_tangent(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {Vec2(n(rng), n(rng)), Vec2(n(rng), n(rng))};
}

}  // namespace detail

inline std::vector<Check> orbit_suite(const Scenario& s) {
  std::vector<Check> out;
  const orbit::OrbitGeometry geom(s.orbit());
  std::mt19937_64 rng(seed);

  // total area by Gauss-Legendre in s with r = tan(s)
  const auto gl = numerics::gauss_legendre(80);
  double area = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double sv = 0.25 * pi * (gl.nodes[i] + 1.0);
    const double r = std::tan(sv);
    const double dr = 1.0 / (std::cos(sv) * std::cos(sv));
    area += 0.25 * pi * gl.weights[i] * geom.symplectic_density({orbit::FiberChart::North, r}) * 2.0 * pi * r * dr;
  }
  out.push_back({"orbit", "total_area_minus_4pi_j", std::abs(area - 4.0 * pi * geom.spec.j()), 1e-9});

  double defining = 0.0;
  double bracket_sign = 0.0;
  double covariance = 0.0;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = detail::random_vec3(rng);
    const Vec3 b = detail::random_vec3(rng);
    const auto wa = orbit::moment_hamiltonian(geom.spec, a);
    const auto wb = orbit::moment_hamiltonian(geom.spec, b);
    auto pt = detail::random_fiber_point(rng);
    if (pt.z == cplx(0.0, 0.0)) pt.z = 0.1;
    const orbit::ChartTangent xi(n(rng), n(rng));
    defining = std::max(defining, std::abs(orbit::symplectic_form_at(geom, pt, orbit::hamiltonian_field(geom, wa, pt), xi) +
                                           wa.gradient(pt).dot(xi)));
    const double bracket = orbit::poisson_bracket(geom, wa, wb, pt);
    const double expected = conventions::poisson_sign * orbit::moment_hamiltonian(geom.spec, a.cross(b))(pt);
    bracket_sign = std::max(bracket_sign, std::abs(bracket - expected));
    const auto other = orbit::chart_transition(pt);
    covariance = std::max(covariance, std::abs(bracket - orbit::poisson_bracket(geom, wa, wb, other)));
  }
  out.push_back({"orbit", "hamiltonian_field_defining_relation", defining, 1e-10});
  out.push_back({"orbit", "poisson_sign_on_moment_functions", bracket_sign, 1e-9});
  out.push_back({"orbit", "bracket_chart_covariance", covariance, 1e-9});
  return out;
}

inline std::vector<Check> fiber_suite(const Scenario& s) {
  std::vector<Check> out;
  const auto& tol = s.tolerances;
  const orbit::OrbitGeometry geom(s.orbit());
  const auto rule = s.rule();
  const auto basis = fiber::build_basis(geom.spec, rule);
  const fiber::FiberSampler sampler(basis, rule);
  const int n = basis.dimension();
  std::mt19937_64 rng(seed + 1);

  double gram = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const double nk = fiber::monomial_norm_squared(geom.spec.two_j, k);
      const double nl = fiber::monomial_norm_squared(geom.spec.two_j, l);
      const double expected = k == l ? nk : 0.0;
      gram = std::max(gram, std::abs(basis.gram(k, l) - expected) / std::sqrt(nk * nl));
    }
  out.push_back({"fiber", "gram_relative_error", gram, tol.gram});

  const auto prequant = [&](const orbit::FiberHamiltonian& w) { return fiber::prequant_matrix(geom, sampler, w).matrix; };
  double herm = 0.0;
  double spectrum = 0.0;
  double dirac = 0.0;
  double polar = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Vec3 a = detail::random_vec3(rng).normalized();
    const Vec3 b = detail::random_vec3(rng);
    const ComplexMatrix ma = prequant(orbit::moment_hamiltonian(geom.spec, a));
    const ComplexMatrix mb = prequant(orbit::moment_hamiltonian(geom.spec, b));
    const ComplexMatrix mab = prequant(orbit::moment_hamiltonian(geom.spec, a.cross(b)));
    herm = std::max(herm, numerics::max_abs(ma - ma.adjoint()));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(ma);
    for (int k = 0; k < n; ++k) spectrum = std::max(spectrum, std::abs(solver.eigenvalues()(k) - (-geom.spec.j() + k)));
    dirac = std::max(dirac, numerics::max_abs(ma * mb - mb * ma - double(conventions::dirac_sign) * I_unit * mab));
    polar = std::max(polar, fiber::polarization_residual(geom, sampler, orbit::moment_hamiltonian(geom.spec, b)));
  }
  out.push_back({"fiber", "prequant_hermiticity", herm, tol.hermiticity});
  out.push_back({"fiber", "unit_moment_spectrum", spectrum, tol.spectrum});
  out.push_back({"fiber", "dirac_condition", dirac, tol.dirac});
  out.push_back({"fiber", "polarization_residual_moment", polar, tol.polarization});
  if (geom.spec.two_j > 0) {
    const auto h3 = orbit::moment_hamiltonian(geom.spec, Vec3(0, 0, 1));
    out.push_back({"fiber", "polarization_residual_quadratic_witness", fiber::polarization_residual(geom, sampler, h3 * h3),
                   1e3 * tol.polarization, true});
  }

  double hom = 0.0;
  double unit = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto g1 = su2::random_element(rng);
    const auto g2 = su2::random_element(rng);
    const ComplexMatrix x1 = fiber::quantize_transition(sampler, basis, g1).matrix;
    const ComplexMatrix x2 = fiber::quantize_transition(sampler, basis, g2).matrix;
    hom = std::max(hom, numerics::max_abs(fiber::quantize_transition(sampler, basis, g1 * g2).matrix - x1 * x2));
    unit = std::max(unit, numerics::max_abs(x1.adjoint() * x1 - ComplexMatrix::Identity(n, n)));
  }
  out.push_back({"fiber", "transition_homomorphism", hom, 1e-9});
  out.push_back({"fiber", "transition_unitarity", unit, 1e-9});
  return out;
}

inline std::vector<Check> gauge_suite(const Scenario& s, const gauge::ConnectionEvaluator& eval) {
  std::vector<Check> out;
  const auto& tol = s.tolerances;
  const auto& model = eval.model();
  std::mt19937_64 rng(seed + 2);
  std::normal_distribution<double> n(0.0, 1.0);

  double equivalence = 0.0;
  double anti = 0.0;
  double lift = 0.0;
  double gauge_law = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto b = detail::random_base_point(model, rng, true);
    const auto v = detail::random_tangent(rng);
    const ComplexMatrix quad = eval(gauge::ConnectionSource::Quadrature, b, v);
    const ComplexMatrix rep = eval(gauge::ConnectionSource::Representation, b, v);
    equivalence = std::max(equivalence, numerics::operator_norm(quad - rep));
    anti = std::max(anti, numerics::max_abs(quad + quad.adjoint()));
    const orbit::ChartTangent xi(n(rng), n(rng));
    lift = std::max(lift, gauge::lift_orthogonality_residual(model, eval.geometry(), b, v,
                                                             detail::random_fiber_point(rng), xi));
    if (model.has_overlap() && model.in_chart(gauge::BaseChart::Primary, b.q) &&
        model.in_chart(gauge::BaseChart::Secondary, b.q))
      gauge_law = std::max(gauge_law, gauge::gauge_residual(eval, b.q, b.p, v));
  }
  out.push_back({"gauge", "connection_equivalence", equivalence, tol.equivalence});
  out.push_back({"gauge", "connection_anti_hermiticity", anti, tol.anti_hermiticity});
  out.push_back({"gauge", "horizontal_lift_orthogonality", lift, tol.lift});
  if (model.has_overlap()) out.push_back({"gauge", "gauge_law_residual", gauge_law, tol.gauge});

  const auto& g = eval.rep().generators;
  double comm = 0.0;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    comm = std::max(comm, numerics::max_abs(g[a] * g[b] - g[b] * g[a] - g[c]));
  }
  out.push_back({"gauge", "representation_commutators", comm, tol.representation});
  return out;
}

inline std::vector<Check> transport_suite(const Scenario& s, const gauge::ConnectionEvaluator& eval) {
  std::vector<Check> out;
  const auto& tol = s.tolerances;
  const auto& model = eval.model();
  for (const auto& [name, spec] : s.paths) {
    const auto& path = spec.path;
    const auto forward = transport::parallel_transport(eval, gauge::ConnectionSource::Representation, path);
    out.push_back({"transport", name + ".unitarity", forward.max_unitarity_deviation, tol.unitarity});
    const auto back = transport::parallel_transport(eval, gauge::ConnectionSource::Representation, transport::reverse(path));
    const int n = eval.dimension();
    out.push_back({"transport", name + ".reversal",
                   numerics::max_abs(forward.unitary * back.unitary - ComplexMatrix::Identity(n, n)), tol.reversal});
    const auto quad = transport::parallel_transport(eval, gauge::ConnectionSource::Quadrature, path);
    out.push_back({"transport", name + ".source_agreement", numerics::max_abs(forward.unitary - quad.unitary),
                   tol.source_agreement});
    const std::string kind = spec.definition.value("kind", "");
    if (model.name == "monopole" && kind == "latitude") {
      const double theta = path.start().q(0);
      const double solid_angle = 2 * pi * (1 - std::cos(theta));
      ComplexMatrix expected = ComplexMatrix::Zero(n, n);
      for (int k = 0; k < n; ++k)
        expected(k, k) = std::exp(cplx(0.0, conventions::holonomy_sign * s.model.sign * (0.5 * s.two_j - k) * solid_angle));
      out.push_back({"transport", name + ".solid_angle_holonomy", numerics::max_abs(forward.unitary - expected),
                     tol.holonomy});
    }
    if (!model.fiber_coupling) {
      const double clean = transport::covariant_residual_total_space(eval, gauge::ConnectionSource::Quadrature, path);
      out.push_back({"transport", name + ".total_space_residual", clean, tol.total_space});
    }
  }
  const auto section = transport::covariant_section_solve(eval, s.section.q_nodes, s.section.p_nodes, [&](const Vec2& q) {
    ComplexVector v = ComplexVector::Zero(eval.dimension());
    v(0) = std::exp(I_unit * q(0));
    return v;
  });
  out.push_back({"transport", "vertical_section_residual", section.residual, tol.section});
  return out;
}

}  // namespace vbquant::verify
