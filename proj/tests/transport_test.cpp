#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vbquant/conventions.hpp"
#include "vbquant/transport.hpp"

using namespace vbquant;
using namespace vbquant::transport;
using gauge::Potential;
using gauge::Vec3;

namespace {

ComplexMatrix monopole_holonomy_oracle(int two_j, int sign, double theta) {
  const double solid_angle = 2 * pi * (1 - std::cos(theta));
  ComplexMatrix d = ComplexMatrix::Zero(two_j + 1, two_j + 1);
  for (int k = 0; k <= two_j; ++k) {
    const double m = 0.5 * two_j - k;
    d(k, k) = std::exp(cplx(0.0, conventions::holonomy_sign * sign * m * solid_angle));
  }
  return d;
}

/// Rectangle in (theta, phi) traversed theta0 -> theta1 at phi0, then phi0 -> phi1, back.
BasePath sphere_rectangle(double theta0, double theta1, double phi0, double phi1, std::size_t steps) {
  return polygon({Vec2(theta0, phi0), Vec2(theta1, phi0), Vec2(theta1, phi1), Vec2(theta0, phi1)}, Vec2::Zero(), steps,
                 true);
}

BasePath q_circle(const Vec2& center, double radius, std::size_t steps) {
  PathPiece piece;
  piece.point = [=](double t) {
    return PhasePoint{center + radius * Vec2(std::cos(2 * pi * t), std::sin(2 * pi * t)), Vec2(0.3, -0.2)};
  };
  piece.velocity = [=](double t) {
    return gauge::BaseTangent{2 * pi * radius * Vec2(-std::sin(2 * pi * t), std::cos(2 * pi * t)), Vec2::Zero()};
  };
  piece.steps = steps;
  return single_piece("q_circle", piece);
}

}  // namespace

TEST(Transport, ZeroPotentialIsIdentity) {
  const ConnectionEvaluator eval(gauge::trivial_model(OrbitSpec(3)));
  const auto path = segment({Vec2(0, 0), Vec2(0, 0)}, {Vec2(1, 2), Vec2(0, 0)}, 100);
  const auto r = parallel_transport(eval, ConnectionSource::Quadrature, path);
  EXPECT_LT(numerics::max_abs(r.unitary - ComplexMatrix::Identity(4, 4)), 1e-14);
  EXPECT_EQ(r.alpha_phase, 0.0);
  EXPECT_EQ(r.steps, 100u);
}

TEST(Transport, ConstantPotentialSegmentMatchesExponential) {
  for (int two_j : {1, 2, 4}) {
    const ConnectionEvaluator eval(gauge::constant_model(OrbitSpec(two_j), Vec3(1, 0, 0), Vec3::Zero()));
    const double length = 1.7;
    const auto path = segment({Vec2(0.2, 0.0), Vec2::Zero()}, {Vec2(0.2 + length, 0.0), Vec2::Zero()}, 1000);
    for (auto source : {ConnectionSource::Representation, ConnectionSource::Quadrature}) {
      const auto r = parallel_transport(eval, source, path);
      EXPECT_LT(numerics::max_abs(r.unitary - numerics::matrix_exp(length * eval.rep().generators[0])), 1e-8);
      EXPECT_LE(r.max_unitarity_deviation, 1e-8);
    }
  }
}

TEST(Transport, MomentumLoopOnlyAccumulatesPhase) {
  const ConnectionEvaluator eval(gauge::constant_model(OrbitSpec(2), Vec3(1, 2, 3), Vec3(3, 2, 1)));
  const auto r = parallel_transport(eval, ConnectionSource::Quadrature, momentum_circle(Vec2(0.5, 0.5), Vec2(1, 1), 0.4, 200));
  EXPECT_LT(numerics::max_abs(r.unitary - ComplexMatrix::Identity(3, 3)), 1e-13);
  EXPECT_EQ(r.alpha_phase, 0.0);
}

TEST(Transport, PhaseIsSignedPhaseSpaceArea) {
  // q1 = r cos(2 pi t), p1 = r sin(2 pi t): the loop p dq encloses -pi r^2
  const ConnectionEvaluator eval(gauge::trivial_model(OrbitSpec(1)));
  const double radius = 0.8;
  PathPiece piece;
  piece.point = [=](double t) {
    return PhasePoint{Vec2(radius * std::cos(2 * pi * t), 0.0), Vec2(radius * std::sin(2 * pi * t), 0.0)};
  };
  piece.velocity = [=](double t) {
    return gauge::BaseTangent{Vec2(-2 * pi * radius * std::sin(2 * pi * t), 0.0),
                              Vec2(2 * pi * radius * std::cos(2 * pi * t), 0.0)};
  };
  piece.steps = 400;
  const auto r = parallel_transport(eval, ConnectionSource::Representation, single_piece("phase_loop", piece));
  EXPECT_NEAR(r.alpha_phase, -pi * radius * radius, 1e-10);
  EXPECT_LT(numerics::max_abs(r.full() - std::exp(I_unit * r.alpha_phase) * ComplexMatrix::Identity(2, 2)), 1e-14);
}

TEST(Transport, ReversalInvertsAndConcatenationComposes) {
  const ConnectionEvaluator eval(gauge::constant_model(OrbitSpec(3), Vec3(0.4, 1.0, -0.3), Vec3(-0.8, 0.2, 0.9)));
  const auto first = q_circle(Vec2(0.1, 0.2), 0.7, 500);
  const auto second = segment({Vec2(0.8, 0.2), Vec2(0.3, -0.2)}, {Vec2(-0.4, 1.0), Vec2(1.0, 0.5)}, 500);
  const auto r1 = parallel_transport(eval, ConnectionSource::Representation, first);
  const auto r_back = parallel_transport(eval, ConnectionSource::Representation, reverse(first));
  EXPECT_LT(numerics::max_abs(r1.unitary * r_back.unitary - ComplexMatrix::Identity(4, 4)), 1e-8);
  EXPECT_NEAR(r1.alpha_phase + r_back.alpha_phase, 0.0, 1e-13);

  const auto r2 = parallel_transport(eval, ConnectionSource::Representation, second);
  const auto r12 = parallel_transport(eval, ConnectionSource::Representation, concatenate(first, second));
  // row vectors: the first path's factor acts first, on the left
  EXPECT_LT(numerics::max_abs(r12.unitary - r1.unitary * r2.unitary), 1e-12);
  EXPECT_NEAR(r12.alpha_phase, r1.alpha_phase + r2.alpha_phase, 1e-14);
}

TEST(Transport, RepresentationAndQuadratureAgree) {
  std::mt19937_64 rng(40);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int two_j : {1, 2, 3}) {
    const ConnectionEvaluator eval(
        gauge::constant_model(OrbitSpec(two_j), Vec3(n(rng), n(rng), n(rng)), Vec3(n(rng), n(rng), n(rng))));
    const auto path = q_circle(Vec2(n(rng), n(rng)), 0.5, 300);
    const auto rep = parallel_transport(eval, ConnectionSource::Representation, path);
    const auto quad = parallel_transport(eval, ConnectionSource::Quadrature, path);
    EXPECT_LT(numerics::max_abs(rep.unitary - quad.unitary), 1e-6);
  }
  const ConnectionEvaluator monopole(gauge::monopole_model(OrbitSpec(2), 1));
  const auto loop = sphere_rectangle(0.4, 2.5, 0.3, 1.9, 200);
  EXPECT_LT(numerics::max_abs(parallel_transport(monopole, ConnectionSource::Representation, loop).unitary -
                              parallel_transport(monopole, ConnectionSource::Quadrature, loop).unitary),
            1e-6);
}

TEST(Transport, NonCommutingOrderings) {
  const ConnectionEvaluator eval(gauge::constant_model(OrbitSpec(1), Vec3(1, 0, 0), Vec3(0, 1, 0)));
  const PhasePoint o{Vec2(0, 0), Vec2::Zero()};
  const PhasePoint x{Vec2(1, 0), Vec2::Zero()};
  const PhasePoint y{Vec2(0, 1), Vec2::Zero()};
  const PhasePoint xy{Vec2(1, 1), Vec2::Zero()};
  const auto a = parallel_transport(eval, ConnectionSource::Representation, concatenate(segment(o, x, 200), segment(x, xy, 200)));
  const auto b = parallel_transport(eval, ConnectionSource::Representation, concatenate(segment(o, y, 200), segment(y, xy, 200)));
  const auto& g = eval.rep().generators;
  EXPECT_LT(numerics::max_abs(a.unitary - numerics::matrix_exp(g[0]) * numerics::matrix_exp(g[1])), 1e-8);
  EXPECT_GT(numerics::operator_norm(a.unitary - b.unitary), 0.1);
}

TEST(Transport, FourthOrderConvergence) {
  const ConnectionEvaluator eval(gauge::constant_model(OrbitSpec(2), Vec3(1.0, 0.3, 0.0), Vec3(0.0, 1.2, -0.5)));
  const auto path_with = [](std::size_t steps) { return q_circle(Vec2(0.2, -0.1), 1.0, steps); };
  const ComplexMatrix reference = parallel_transport(eval, ConnectionSource::Representation, path_with(1000000)).unitary;
  const auto error = [&](std::size_t steps) {
    return numerics::operator_norm(parallel_transport(eval, ConnectionSource::Representation, path_with(steps)).unitary - reference);
  };
  const double coarse = error(200);
  const double fine = error(400);
  RecordProperty("coarse_error", testing::PrintToString(coarse));
  RecordProperty("fine_error", testing::PrintToString(fine));
  const double ratio = coarse / fine;
  EXPECT_GE(ratio, 12.0) << coarse << " " << fine;
  EXPECT_LE(ratio, 20.0);
}

TEST(Transport, UnitarityDefectIsFifthOrder) {
  // RK4 on an anti-Hermitian generator: |R(ix)|^2 = 1 - x^6/72 per step
  const ConnectionEvaluator eval(gauge::constant_model(OrbitSpec(2), Vec3(1.0, 0.3, 0.0), Vec3(0.0, 1.2, -0.5)));
  const auto deviation = [&](std::size_t steps) {
    return parallel_transport(eval, ConnectionSource::Representation, q_circle(Vec2(0.2, -0.1), 1.0, steps))
        .max_unitarity_deviation;
  };
  const double ratio = deviation(100) / deviation(200);
  EXPECT_GE(ratio, 24.0);
  EXPECT_LE(ratio, 40.0);
  EXPECT_LE(deviation(1000), 1e-8);
}

TEST(WilsonLoop, ContractibleLoopWithZeroPotential) {
  const ConnectionEvaluator eval(gauge::trivial_model(OrbitSpec(2)));
  const auto w = wilson_loop(eval, ConnectionSource::Quadrature, q_circle(Vec2::Zero(), 1.0, 100));
  EXPECT_LT(numerics::max_abs(w.holonomy - ComplexMatrix::Identity(3, 3)), 1e-14);
  EXPECT_NEAR(w.trace.real(), 3.0, 1e-14);
}

TEST(WilsonLoop, MonopoleLatitudeAtSixtyDegrees) {
  const ConnectionEvaluator eval(gauge::monopole_model(OrbitSpec(2), 1));
  const auto w = wilson_loop(eval, ConnectionSource::Representation, latitude_loop(pi / 3, 10000));
  ComplexMatrix expected = ComplexMatrix::Zero(5 - 2, 5 - 2);
  // solid angle pi: m = 1, 0, -1 give -1, 1, -1
  expected.diagonal() << -1.0, 1.0, -1.0;
  EXPECT_LT(numerics::max_abs(w.holonomy - expected), 1e-6);
  EXPECT_LT(numerics::max_abs(w.holonomy - monopole_holonomy_oracle(2, 1, pi / 3)), 1e-6);
}

TEST(WilsonLoop, MonopoleSolidAngleLaw) {
  for (int sign : {1, -1}) {
    for (int two_j : {1, 2, 3, 4}) {
      const ConnectionEvaluator eval(gauge::monopole_model(OrbitSpec(two_j), sign));
      for (double theta : {pi / 6, pi / 3, pi / 2, 2 * pi / 3}) {
        const auto w = wilson_loop(eval, ConnectionSource::Representation, latitude_loop(theta, 10000));
        EXPECT_LT(numerics::max_abs(w.holonomy - monopole_holonomy_oracle(two_j, sign, theta)), 1e-6)
            << "sign=" << sign << " two_j=" << two_j << " theta=" << theta;
      }
    }
  }
}

TEST(WilsonLoop, ChartIndependence) {
  const ConnectionEvaluator eval(gauge::monopole_model(OrbitSpec(3), -1));
  for (const auto& loop : {sphere_rectangle(0.5, 2.4, 0.2, 1.4, 400), sphere_rectangle(1.2, 2.0, -1.0, 2.5, 400)}) {
    BasePath north = loop;
    north.fixed_chart = BaseChart::Primary;
    BasePath south = loop;
    south.fixed_chart = BaseChart::Secondary;
    const auto automatic = wilson_loop(eval, ConnectionSource::Representation, loop);
    EXPECT_EQ(automatic.transport.crossings, 2u);
    const auto a = wilson_loop(eval, ConnectionSource::Representation, north).holonomy;
    const auto b = wilson_loop(eval, ConnectionSource::Representation, south).holonomy;
    EXPECT_LT(numerics::max_abs(automatic.holonomy - a), 1e-6);
    EXPECT_LT(numerics::max_abs(a - b), 1e-6);
  }
}

TEST(WilsonLoop, MonopoleLatitudeInBothChartsAndAcrossTheEquator) {
  const ConnectionEvaluator eval(gauge::monopole_model(OrbitSpec(2), 1));
  BasePath south = latitude_loop(pi / 3, 4000);
  south.fixed_chart = BaseChart::Secondary;
  EXPECT_LT(numerics::max_abs(wilson_loop(eval, ConnectionSource::Representation, south).holonomy -
                              monopole_holonomy_oracle(2, 1, pi / 3)),
            1e-6);
}

TEST(WilsonLoop, SmallSquareApproachesCurvature) {
  const ConnectionEvaluator eval(gauge::constant_model(OrbitSpec(2), Vec3(1, 0, 0), Vec3(0, 1, 0)));
  const gauge::BaseTangent e1{Vec2(1, 0), Vec2::Zero()};
  const gauge::BaseTangent e2{Vec2(0, 1), Vec2::Zero()};
  const ComplexMatrix f = gauge::curvature(eval.model(), eval.rep(), {}, e1, e2);
  const auto remainder = [&](double eps) {
    const auto loop = polygon({Vec2(0, 0), Vec2(eps, 0), Vec2(eps, eps), Vec2(0, eps)}, Vec2::Zero(), 200, true);
    const ComplexMatrix u = wilson_loop(eval, ConnectionSource::Representation, loop).holonomy;
    return numerics::operator_norm(u - ComplexMatrix::Identity(3, 3) - eps * eps * f);
  };
  const double ratio = remainder(0.02) / remainder(0.01);
  EXPECT_GT(ratio, 6.0);
  EXPECT_LT(ratio, 10.0);
}

TEST(WilsonLoop, RejectsOpenLoops) {
  const ConnectionEvaluator eval(gauge::trivial_model(OrbitSpec(1)));
  EXPECT_THROW(wilson_loop(eval, ConnectionSource::Representation, segment({}, {Vec2(1, 0), Vec2::Zero()}, 10)), Error);
}

TEST(Transport, ChartErrors) {
  const ConnectionEvaluator trivial(gauge::trivial_model(OrbitSpec(1)));
  BasePath path = segment({}, {Vec2(1, 0), Vec2::Zero()}, 10);
  path.fixed_chart = BaseChart::Secondary;
  try {
    parallel_transport(trivial, ConnectionSource::Representation, path);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ChartError);
  }
  const ConnectionEvaluator monopole(gauge::monopole_model(OrbitSpec(1), 1));
  BasePath through_pole = segment({Vec2(2.0, 0.0), Vec2::Zero()}, {Vec2(pi, 0.0), Vec2::Zero()}, 10);
  through_pole.fixed_chart = BaseChart::Primary;
  EXPECT_THROW(parallel_transport(monopole, ConnectionSource::Representation, through_pole), Error);
}

TEST(CovariantSection, ConstantAlongMomentumDirections) {
  const ConnectionEvaluator eval(gauge::constant_model(OrbitSpec(2), Vec3(1, 0, 2), Vec3(0, -1, 1)));
  std::vector<Vec2> q_nodes;
  std::vector<Vec2> p_nodes;
  for (int i = 0; i < 5; ++i) q_nodes.emplace_back(0.3 * i, -0.2 * i);
  for (int i = 0; i < 4; ++i) p_nodes.emplace_back(0.5 * i, 0.25 * i);
  const auto boundary = [](const Vec2& q) {
    ComplexVector v(3);
    v << std::exp(cplx(0.0, q(0))), cplx(q(1), 1.0), 0.5;
    return v;
  };
  const auto s = covariant_section_solve(eval, q_nodes, p_nodes, boundary);
  for (std::size_t iq = 0; iq < q_nodes.size(); ++iq)
    for (std::size_t ip = 1; ip < p_nodes.size(); ++ip) EXPECT_EQ(s.values[iq][ip], s.values[iq][0]);
  EXPECT_LE(s.residual, 1e-12);
}

TEST(CovariantSection, TrivialBundleFactorizes) {
  const ConnectionEvaluator eval(gauge::trivial_model(OrbitSpec(1)));
  ComplexVector fixed(2);
  fixed << cplx(0.6, 0.0), cplx(0.0, 0.8);
  const auto s = covariant_section_solve(eval, {Vec2(0, 0), Vec2(1, 2)}, {Vec2(0, 0), Vec2(3, 3)},
                                         [&](const Vec2& q) { return ComplexVector(std::cos(q(0) + q(1)) * fixed); });
  for (const auto& row : s.values)
    for (const auto& psi : row) EXPECT_LT((psi - (psi(0) / fixed(0)) * fixed).norm(), 1e-15);
}

TEST(CovariantSection, MomentumCouplingIsUnsupported) {
  const OrbitSpec spec(1);
  const auto tau = su2::tau(0);
  const auto model = gauge::custom_model(
      spec, "momentum", [](const Vec2&) { return Potential{}; }, [tau](const Vec2&) { return Potential{tau, tau}; });
  const ConnectionEvaluator eval(model);
  try {
    covariant_section_solve(eval, {Vec2::Zero()}, {Vec2::Zero()}, [](const Vec2&) { return ComplexVector::Ones(2); });
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedPolarization);
  }
}

TEST(TotalSpaceResidual, ZeroPotential) {
  const ConnectionEvaluator eval(gauge::trivial_model(OrbitSpec(2)));
  const auto path = segment({Vec2(0, 0), Vec2(0.2, 0.1)}, {Vec2(1, 1), Vec2(0.2, 0.1)}, 1000);
  EXPECT_LE(covariant_residual_total_space(eval, ConnectionSource::Quadrature, path), 1e-10);
}

TEST(TotalSpaceResidual, MonopoleAndConstantPathsWithCorruption) {
  const ConnectionEvaluator monopole(gauge::monopole_model(OrbitSpec(1), 1));
  const ConnectionEvaluator constant(gauge::constant_model(OrbitSpec(2), Vec3(0.8, -0.4, 0.3), Vec3(0.1, 0.9, -0.6)));
  const BasePath latitude = latitude_loop(pi / 3, 10000, Vec2(0.3, 0.5));
  const BasePath circle = q_circle(Vec2(0.1, 0.0), 0.6, 10000);
  const std::pair<const ConnectionEvaluator*, const BasePath*> cases[] = {{&monopole, &latitude}, {&constant, &circle}};
  for (const auto& [eval, path] : cases) {
    const double clean = covariant_residual_total_space(*eval, ConnectionSource::Quadrature, *path);
    ResidualOptions corrupt;
    corrupt.corrupt = true;
    const double dirty = covariant_residual_total_space(*eval, ConnectionSource::Quadrature, *path, corrupt);
    EXPECT_LE(clean, 1e-5) << eval->model().name;
    EXPECT_GE(dirty, 10.0 * clean) << eval->model().name;
  }
}
