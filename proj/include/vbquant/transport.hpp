#pragma once

// Parallel transport of row-vector wavefunctions along base paths,
// Psi' = Psi (i <alpha_B, v> + A(v)), with chart-transition insertions,
// Wilson loops, covariant sections for the vertical polarization, and the
// total-space residual of the reconstructed prequantum section.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbquant/error.hpp"
#include "vbquant/gauge.hpp"
#include "vbquant/numerics.hpp"

namespace vbquant::transport {

using gauge::BaseChart;
using gauge::BasePoint;
using gauge::BaseTangent;
using gauge::ConnectionEvaluator;
using gauge::ConnectionSource;
using gauge::GaugeModel;
using gauge::Vec2;
using orbit::OrbitSpec;

inline constexpr double unitarity_tolerance = 1e-6;
inline constexpr double crossing_tolerance = 1e-10;
inline constexpr double closure_tolerance = 1e-12;
/// Parameter step of the central differences along lifted paths.
inline constexpr double lift_difference_step = 1e-4;
/// Phase error injected by the corrupted residual check.
inline constexpr double corruption_rate = 1e-2;

struct PhasePoint {
  Vec2 q = Vec2::Zero();
  Vec2 p = Vec2::Zero();
};

/// One smooth piece on [0, 1].
struct PathPiece {
  std::function<PhasePoint(double)> point;
  std::function<BaseTangent(double)> velocity;  // empty: central differences
  std::size_t steps = numerics::default_steps_per_unit;

  BaseTangent velocity_at(double t) const {
    if (velocity) return velocity(t);
    constexpr double h = 1e-6;
    const PhasePoint a = point(t + h);
    const PhasePoint b = point(t - h);
    return {(a.q - b.q) / (2 * h), (a.p - b.p) / (2 * h)};
  }
};

/// Piecewise-smooth path; pieces are traversed in order.
struct BasePath {
  std::string name;
  std::vector<PathPiece> pieces;
  std::optional<BaseChart> fixed_chart;

  PhasePoint start() const { return pieces.front().point(0.0); }
  PhasePoint end() const { return pieces.back().point(1.0); }
  std::size_t total_steps() const {
    std::size_t n = 0;
    for (const auto& piece : pieces) n += piece.steps;
    return n;
  }
};

inline BasePath single_piece(std::string name, PathPiece piece) {
  BasePath path;
  path.name = std::move(name);
  path.pieces.push_back(std::move(piece));
  return path;
}

/// Straight line from (q0, p0) to (q1, p1).
inline BasePath segment(const PhasePoint& from, const PhasePoint& to, std::size_t steps) {
  PathPiece piece;
  piece.point = [from, to](double t) { return PhasePoint{from.q + t * (to.q - from.q), from.p + t * (to.p - from.p)}; };
  piece.velocity = [from, to](double) { return BaseTangent{to.q - from.q, to.p - from.p}; };
  piece.steps = steps;
  return single_piece("segment", std::move(piece));
}

/// Closed polygon through the waypoints in q at fixed p, one piece per edge.
inline BasePath polygon(const std::vector<Vec2>& waypoints, const Vec2& p, std::size_t steps_per_edge, bool closed) {
  if (waypoints.size() < 2) fail(ErrorKind::InvalidArgument, "polygon needs at least two waypoints");
  BasePath path;
  path.name = "polygon";
  const std::size_t edges = closed ? waypoints.size() : waypoints.size() - 1;
  for (std::size_t e = 0; e < edges; ++e) {
    const Vec2 a = waypoints[e];
    const Vec2 b = waypoints[(e + 1) % waypoints.size()];
    PathPiece piece;
    piece.point = [a, b, p](double t) { return PhasePoint{a + t * (b - a), p}; };
    piece.velocity = [a, b](double) { return BaseTangent{b - a, Vec2::Zero()}; };
    piece.steps = steps_per_edge;
    path.pieces.push_back(std::move(piece));
  }
  return path;
}

/// Colatitude-theta circle on the sphere base, azimuth phi0 -> phi0 + 2 pi.
inline BasePath latitude_loop(double theta, std::size_t steps, const Vec2& p = Vec2::Zero(), double phi0 = 0.0) {
  PathPiece piece;
  piece.point = [theta, p, phi0](double t) { return PhasePoint{Vec2(theta, phi0 + 2 * pi * t), p}; };
  piece.velocity = [](double) { return BaseTangent{Vec2(0.0, 2 * pi), Vec2::Zero()}; };
  piece.steps = steps;
  return single_piece("latitude", std::move(piece));
}

/// Loop over a fixed q with p on a circle; the phase is the signed area.
inline BasePath momentum_circle(const Vec2& q, const Vec2& center, double radius, std::size_t steps) {
  PathPiece piece;
  piece.point = [q, center, radius](double t) {
    return PhasePoint{q, center + radius * Vec2(std::cos(2 * pi * t), std::sin(2 * pi * t))};
  };
  piece.velocity = [radius](double t) {
    return BaseTangent{Vec2::Zero(), 2 * pi * radius * Vec2(-std::sin(2 * pi * t), std::cos(2 * pi * t))};
  };
  piece.steps = steps;
  return single_piece("momentum_circle", std::move(piece));
}

inline BasePath reverse(const BasePath& path) {
  BasePath out;
  out.name = path.name + "_reversed";
  out.fixed_chart = path.fixed_chart;
  for (auto it = path.pieces.rbegin(); it != path.pieces.rend(); ++it) {
    PathPiece piece;
    const PathPiece original = *it;
    piece.point = [original](double t) { return original.point(1.0 - t); };
    piece.velocity = [original](double t) {
      const BaseTangent v = original.velocity_at(1.0 - t);
      return BaseTangent{-v.dq, -v.dp};
    };
    piece.steps = original.steps;
    out.pieces.push_back(std::move(piece));
  }
  return out;
}

/// first followed by second; the chart policy of first is kept.
inline BasePath concatenate(const BasePath& first, const BasePath& second) {
  BasePath out = first;
  out.name = first.name + "+" + second.name;
  out.pieces.insert(out.pieces.end(), second.pieces.begin(), second.pieces.end());
  return out;
}

struct TrajectorySample {
  std::size_t piece = 0;
  double t = 0.0;
  BaseChart chart = BaseChart::Primary;
  ComplexMatrix unitary;
  double phase = 0.0;
};

struct TransportResult {
  ComplexMatrix unitary;
  double alpha_phase = 0.0;
  std::size_t steps = 0;
  double max_unitarity_deviation = 0.0;
  BaseChart final_chart = BaseChart::Primary;
  std::size_t crossings = 0;
  std::vector<TrajectorySample> trajectory;

  /// e^{i alpha_phase} times the unitary factor.
  ComplexMatrix full() const { return std::exp(I_unit * alpha_phase) * unitary; }
};

struct TransportOptions {
  bool record_trajectory = false;
};

namespace detail {

inline double unitarity_deviation(const ComplexMatrix& u) {
  return numerics::max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

inline BaseChart preferred_chart(const GaugeModel& model, const Vec2& q) {
  if (!model.chart_boundary) return BaseChart::Primary;
  return model.chart_boundary(q) >= 0.0 ? BaseChart::Primary : BaseChart::Secondary;
}

class Stepper {
 public:
  Stepper(const ConnectionEvaluator& eval, ConnectionSource source, const PathPiece& piece)
      : eval_(eval), source_(source), piece_(piece) {}

  ComplexMatrix generator(BaseChart chart, double t) const {
    const PhasePoint x = piece_.point(t);
    return eval_(source_, {chart, x.q, x.p}, piece_.velocity_at(t));
  }

  double alpha(double t) const {
    const PhasePoint x = piece_.point(t);
    return x.p.dot(piece_.velocity_at(t).dq);
  }

  /// One RK4 step of U' = U A(v); the scalar phase is Simpson on the same nodes.
  void step(BaseChart chart, double t, double dt, ComplexMatrix& u, double& phase) const {
    const ComplexMatrix a0 = generator(chart, t);
    const ComplexMatrix am = generator(chart, t + 0.5 * dt);
    const ComplexMatrix a1 = generator(chart, t + dt);
    const ComplexMatrix k1 = u * a0;
    const ComplexMatrix k2 = (u + (0.5 * dt) * k1) * am;
    const ComplexMatrix k3 = (u + (0.5 * dt) * k2) * am;
    const ComplexMatrix k4 = (u + dt * k3) * a1;
    u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    phase += (dt / 6.0) * (alpha(t) + 4.0 * alpha(t + 0.5 * dt) + alpha(t + dt));
  }

 private:
  const ConnectionEvaluator& eval_;
  ConnectionSource source_;
  const PathPiece& piece_;
};

}  // namespace detail

/// RK4 transport with Psi(0) = I. Auto-charted paths switch charts where the
/// model's chart-boundary function changes sign, inserting U <- U X(g) on
/// Primary -> Secondary and U <- U X(g)^-1 on the way back.
inline TransportResult parallel_transport(const ConnectionEvaluator& eval, ConnectionSource source, const BasePath& path,
                                 const TransportOptions& options = {}) {
  const GaugeModel& model = eval.model();
  if (path.pieces.empty()) fail(ErrorKind::InvalidArgument, "path has no pieces");
  const int n = eval.dimension();
  TransportResult result;
  result.unitary = ComplexMatrix::Identity(n, n);
  const bool automatic = !path.fixed_chart.has_value();
  BaseChart chart = automatic ? detail::preferred_chart(model, path.start().q) : *path.fixed_chart;

  const auto check_chart = [&](BaseChart c, const Vec2& q) {
    if (!model.in_chart(c, q))
      fail(ErrorKind::ChartError, "path leaves chart '" + std::string(gauge::to_string(c)) + "' of model " + model.name);
  };
  const auto record = [&](std::size_t piece, double t) {
    if (options.record_trajectory) result.trajectory.push_back({piece, t, chart, result.unitary, result.alpha_phase});
  };
  const auto switch_chart = [&](double t, const PathPiece& piece) {
    const Vec2 q = piece.point(t).q;
    const ComplexMatrix x = eval.transition(q);  // chart-error without a registered transition
    if (chart == BaseChart::Primary) {
      result.unitary = result.unitary * x;
      chart = BaseChart::Secondary;
    } else {
      result.unitary = result.unitary * x.inverse();
      chart = BaseChart::Primary;
    }
    ++result.crossings;
  };

  for (std::size_t pi_index = 0; pi_index < path.pieces.size(); ++pi_index) {
    const PathPiece& piece = path.pieces[pi_index];
    if (piece.steps == 0) fail(ErrorKind::InvalidArgument, "path piece needs at least one step");
    const detail::Stepper stepper(eval, source, piece);
    const auto grid = numerics::uniform_grid(0.0, 1.0, piece.steps);
    check_chart(chart, piece.point(0.0).q);
    record(pi_index, 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      double t0 = grid[i - 1];
      const double t1 = grid[i];
      if (automatic && detail::preferred_chart(model, piece.point(t1).q) != chart) {
        // bisect the sign change of the boundary function
        double lo = t0;
        double hi = t1;
        while (hi - lo > crossing_tolerance) {
          const double mid = 0.5 * (lo + hi);
          (detail::preferred_chart(model, piece.point(mid).q) == chart ? lo : hi) = mid;
        }
        const double crossing = 0.5 * (lo + hi);
        if (crossing > t0) stepper.step(chart, t0, crossing - t0, result.unitary, result.alpha_phase);
        switch_chart(crossing, piece);
        t0 = crossing;
      }
      check_chart(chart, piece.point(t1).q);
      stepper.step(chart, t0, t1 - t0, result.unitary, result.alpha_phase);
      ++result.steps;
      result.max_unitarity_deviation = std::max(result.max_unitarity_deviation, detail::unitarity_deviation(result.unitary));
      record(pi_index, t1);
    }
  }
  result.final_chart = chart;
  if (result.max_unitarity_deviation > unitarity_tolerance)
    fail(ErrorKind::AccuracyFailure, "transport lost unitarity beyond tolerance");
  return result;
}

struct WilsonLoop {
  ComplexMatrix holonomy;
  cplx trace{0.0, 0.0};
  TransportResult transport;
};

/// Distance between path endpoints; sphere azimuths are compared mod 2 pi.
inline double closure_gap(const GaugeModel& model, const PhasePoint& a, const PhasePoint& b) {
  Vec2 dq = a.q - b.q;
  if (model.base == gauge::BaseKind::Sphere) dq(1) = std::remainder(dq(1), 2 * pi);
  return std::max(dq.cwiseAbs().maxCoeff(), (a.p - b.p).cwiseAbs().maxCoeff());
}

/// Unitary factor of the loop transport and its trace.
inline WilsonLoop wilson_loop(const ConnectionEvaluator& eval, ConnectionSource source, const BasePath& loop) {
  if (loop.pieces.empty()) fail(ErrorKind::InvalidArgument, "loop has no pieces");
  if (closure_gap(eval.model(), loop.start(), loop.end()) > closure_tolerance)
    fail(ErrorKind::InvalidArgument, "loop is not closed");
  WilsonLoop w;
  w.transport = parallel_transport(eval, source, loop);
  w.holonomy = w.transport.unitary;
  w.trace = w.holonomy.trace();
  return w;
}

/// Psi on a q-grid times p-grid; values[iq][ip] is a row vector.
struct BundleSection {
  std::vector<Vec2> q_nodes;
  std::vector<Vec2> p_nodes;
  std::vector<std::vector<ComplexVector>> values;
  double residual = 0.0;
};

/// Covariant-constant sections for D(B) = span{d/dp_k}. Since alpha_B and A
/// both vanish on vertical vectors, Psi(q, p) = Psi0(q); the residual of
/// d_p Psi - Psi A(d_p) is evaluated on the grid with quadrature A.
inline BundleSection covariant_section_solve(const ConnectionEvaluator& eval, const std::vector<Vec2>& q_nodes,
                                             const std::vector<Vec2>& p_nodes,
                                             const std::function<ComplexVector(const Vec2&)>& boundary) {
  const GaugeModel& model = eval.model();
  if (model.momentum_potential || model.fiber_coupling)
    fail(ErrorKind::UnsupportedPolarization, "model couples to momentum directions; vertical polarization unsupported");
  if (q_nodes.empty() || p_nodes.empty()) fail(ErrorKind::InvalidArgument, "section grid is empty");
  BundleSection s{q_nodes, p_nodes, {}, 0.0};
  s.values.resize(q_nodes.size());
  for (std::size_t iq = 0; iq < q_nodes.size(); ++iq) {
    const ComplexVector psi0 = boundary(q_nodes[iq]);
    if (psi0.size() != eval.dimension()) fail(ErrorKind::InvalidArgument, "boundary data has the wrong dimension");
    if (!psi0.allFinite()) fail(ErrorKind::InvalidArgument, "boundary data is not finite");
    s.values[iq].assign(p_nodes.size(), psi0);
  }
  for (std::size_t iq = 0; iq < q_nodes.size(); ++iq) {
    for (std::size_t ip = 0; ip < p_nodes.size(); ++ip) {
      const BasePoint b{BaseChart::Primary, q_nodes[iq], p_nodes[ip]};
      const ComplexVector& psi = s.values[iq][ip];
      for (int k = 0; k < 2; ++k) {
        BaseTangent v;
        v.dp(k) = 1.0;
        // one-sided difference to the next p node in direction k when present
        ComplexVector derivative = ComplexVector::Zero(psi.size());
        if (ip + 1 < p_nodes.size() && std::abs(p_nodes[ip + 1](k) - p_nodes[ip](k)) > 0.0)
          derivative = (s.values[iq][ip + 1] - psi) / (p_nodes[ip + 1](k) - p_nodes[ip](k));
        const ComplexVector rhs = (psi.transpose() * eval(ConnectionSource::Quadrature, b, v)).transpose();
        s.residual = std::max(s.residual, (derivative - rhs).cwiseAbs().maxCoeff());
      }
    }
  }
  return s;
}

struct ResidualOptions {
  bool corrupt = false;
  std::size_t samples_per_piece = 16;
  double h = lift_difference_step;
};

/// Fiber points at which the total-space residual is sampled.
inline std::vector<orbit::ChartPoint> residual_fiber_points() {
  using orbit::FiberChart;
  return {{FiberChart::North, cplx(0.0, 0.0)},  {FiberChart::North, cplx(0.5, 0.0)},
          {FiberChart::North, cplx(0.3, 0.4)},  {FiberChart::North, cplx(0.0, -0.7)},
          {FiberChart::North, cplx(1.2, 0.1)},  {FiberChart::North, cplx(-0.9, 0.9)}};
}

/// max |v#psi - i <chi*alpha_E, v#> psi| over sample times, fiber points and
/// the rows of the transported frame, where psi_r = e^{i phase} sum_mu U_{r mu} phi_mu.
/// The derivative is a central difference along the lifted curve; U at
/// t +- h comes from single RK4 steps out of the recorded trajectory node.
inline double covariant_residual_total_space(const ConnectionEvaluator& eval, ConnectionSource source,
                                             const BasePath& path, const ResidualOptions& options = {}) {
  const TransportResult result = parallel_transport(eval, source, path, {true});
  const GaugeModel& model = eval.model();
  const auto& geom = eval.geometry();
  const auto& basis = eval.basis();
  const int n = eval.dimension();
  const double h = options.h;
  const auto fiber_points = residual_fiber_points();

  const auto sections = [&](const orbit::ChartPoint& f) {
    ComplexVector phi(n);
    for (int mu = 0; mu < n; ++mu) phi(mu) = basis.value(mu, f.z);
    return phi;
  };
  const auto corruption = [&](std::size_t piece, double t) {
    return options.corrupt ? std::exp(I_unit * corruption_rate * (static_cast<double>(piece) + t)) : cplx(1.0, 0.0);
  };

  double worst = 0.0;
  std::size_t cursor = 0;
  for (std::size_t piece_index = 0; piece_index < path.pieces.size(); ++piece_index) {
    const PathPiece& piece = path.pieces[piece_index];
    const detail::Stepper stepper(eval, source, piece);
    const std::size_t stride = std::max<std::size_t>(1, piece.steps / (options.samples_per_piece + 1));
    // trajectory nodes of this piece occupy [cursor, cursor + steps]
    const std::size_t first = cursor;
    while (cursor < result.trajectory.size() && result.trajectory[cursor].piece == piece_index) ++cursor;
    for (std::size_t node = first + stride; node + stride < cursor; node += stride) {
      const TrajectorySample& sample = result.trajectory[node];
      const TrajectorySample& before = result.trajectory[node - 1];
      const TrajectorySample& after = result.trajectory[node + 1];
      if (before.chart != sample.chart || after.chart != sample.chart) continue;
      const double t = sample.t;
      if (t - h < 0.0 || t + h > 1.0) continue;
      if (detail::preferred_chart(model, piece.point(t + h).q) != detail::preferred_chart(model, piece.point(t - h).q) &&
          !path.fixed_chart)
        continue;

      ComplexMatrix u_plus = sample.unitary;
      ComplexMatrix u_minus = sample.unitary;
      double phase_plus = sample.phase;
      double phase_minus = sample.phase;
      stepper.step(sample.chart, t, h, u_plus, phase_plus);
      stepper.step(sample.chart, t, -h, u_minus, phase_minus);

      const PhasePoint x = piece.point(t);
      const BaseTangent v = piece.velocity_at(t);
      const BasePoint b{sample.chart, x.q, x.p};
      const auto w = gauge::orbit_function(model, b, v);
      for (const auto& f : fiber_points) {
        const orbit::ChartTangent field = orbit::hamiltonian_field(geom, w, f);
        const cplx dz(field.x(), field.y());
        // lifted curve f' = -H_w(f)
        const orbit::ChartPoint f_plus{f.chart, f.z - h * dz};
        const orbit::ChartPoint f_minus{f.chart, f.z + h * dz};
        const ComplexVector psi_plus =
            corruption(piece_index, t + h) * std::exp(I_unit * phase_plus) * (u_plus * sections(f_plus));
        const ComplexVector psi_minus =
            corruption(piece_index, t - h) * std::exp(I_unit * phase_minus) * (u_minus * sections(f_minus));
        const ComplexVector psi =
            corruption(piece_index, t) * std::exp(I_unit * sample.phase) * (sample.unitary * sections(f));
        const ComplexVector lhs = (psi_plus - psi_minus) / (2.0 * h);
        // <chi*alpha_E, v#> = p.dq + w(f) + theta(-H_w)
        const cplx pairing = x.p.dot(v.dq) + w(f) - orbit::kahler_potential_at(geom, f)(field);
        worst = std::max(worst, (lhs - I_unit * pairing * psi).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

}  // namespace vbquant::transport
