#pragma once

// Scenario files: JSON description of an orbit, a gauge model, quadrature
// sizes, named paths and tolerance overrides. Validation happens up front;
// model construction runs the minimal-coupling check.

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vbquant/error.hpp"
#include "vbquant/fiber.hpp"
#include "vbquant/gauge.hpp"
#include "vbquant/transport.hpp"

namespace vbquant::scenario {

using json = nlohmann::json;
using gauge::Vec2;
using gauge::Vec3;

/// Environment variable consulted for relative --config paths.
inline constexpr const char* config_dir_variable = "VBQUANT_CONFIG_DIR";

struct Tolerances {
  double gram = 1e-10;
  double hermiticity = 1e-8;
  double spectrum = 1e-8;
  double dirac = 1e-8;
  double polarization = 1e-8;
  double lift = 1e-8;
  double equivalence = 1e-8;
  double anti_hermiticity = 1e-9;
  double representation = 1e-9;
  double gauge = 1e-6;
  double holonomy = 1e-6;
  double unitarity = 1e-8;
  double reversal = 1e-8;
  double source_agreement = 1e-6;
  double total_space = 1e-5;
  double section = 1e-12;

  std::map<std::string, double*> fields() {
    return {{"gram", &gram},
            {"hermiticity", &hermiticity},
            {"spectrum", &spectrum},
            {"dirac", &dirac},
            {"polarization", &polarization},
            {"lift", &lift},
            {"equivalence", &equivalence},
            {"anti_hermiticity", &anti_hermiticity},
            {"representation", &representation},
            {"gauge", &gauge},
            {"holonomy", &holonomy},
            {"unitarity", &unitarity},
            {"reversal", &reversal},
            {"source_agreement", &source_agreement},
            {"total_space", &total_space},
            {"section", &section}};
  }

  void override_all(double value) {
    for (auto& [name, field] : fields()) *field = value;
  }

  json to_json() {
    json out = json::object();
    for (auto& [name, field] : fields()) out[name] = *field;
    return out;
  }
};

struct ModelSpec {
  std::string kind = "trivial";
  int sign = 1;
  Vec3 c1 = Vec3::Zero();
  Vec3 c2 = Vec3::Zero();
  Vec3 u = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

struct PathSpec {
  std::string name;
  json definition;
  transport::BasePath path;
};

struct SectionSpec {
  std::vector<Vec2> q_nodes{Vec2(0.0, 0.0), Vec2(0.5, 0.0), Vec2(1.0, 0.0)};
  std::vector<Vec2> p_nodes{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
};

struct Scenario {
  std::string source = "<inline>";
  int two_j = 1;
  ModelSpec model;
  std::optional<std::size_t> n_t;
  std::optional<std::size_t> n_phi;
  std::map<std::string, PathSpec> paths;
  SectionSpec section;
  Tolerances tolerances;
  std::string output = "json";
  json echo = json::object();

  orbit::OrbitSpec orbit() const { return orbit::OrbitSpec(two_j); }

  numerics::QuadratureRule rule() const {
    const auto fallback = fiber::default_rule(orbit());
    return numerics::sphere_rule(n_t.value_or(fallback.n_t), n_phi.value_or(fallback.n_phi));
  }
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& field, const std::string& message) {
  fail(ErrorKind::ValidationError, "field '" + field + "': " + message);
}

inline const json& require(const json& node, const std::string& key, const std::string& where) {
  if (!node.is_object() || !node.contains(key)) invalid(where + key, "is required");
  return node.at(key);
}

inline double number(const json& node, const std::string& field) {
  if (!node.is_number()) invalid(field, "must be a number");
  const double x = node.get<double>();
  if (!std::isfinite(x)) invalid(field, "must be finite");
  return x;
}

inline int integer(const json& node, const std::string& field) {
  if (!node.is_number_integer()) invalid(field, "must be an integer");
  return node.get<int>();
}

inline std::size_t count(const json& node, const std::string& field) {
  const int n = integer(node, field);
  if (n < 1) invalid(field, "must be a positive integer");
  return static_cast<std::size_t>(n);
}

template <int N>
Eigen::Matrix<double, N, 1> vector(const json& node, const std::string& field) {
  if (!node.is_array() || node.size() != N) invalid(field, "must be an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out(i) = number(node[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]");
  return out;
}

inline std::vector<Vec2> points(const json& node, const std::string& field) {
  if (!node.is_array() || node.empty()) invalid(field, "must be a non-empty array of [x, y] pairs");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(vector<2>(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline transport::PhasePoint phase_point(const json& node, const std::string& field) {
  transport::PhasePoint x;
  x.q = vector<2>(require(node, "q", field + "."), field + ".q");
  x.p = node.contains("p") ? vector<2>(node.at("p"), field + ".p") : Vec2::Zero();
  return x;
}

inline std::string text(const json& node, const std::string& field) {
  if (!node.is_string()) invalid(field, "must be a string");
  return node.get<std::string>();
}

inline transport::BasePath parse_path(const std::string& name, const json& node) {
  const std::string where = "paths." + name;
  if (!node.is_object()) invalid(where, "must be an object");
  const std::string kind = text(require(node, "kind", where + "."), where + ".kind");
  const auto steps_of = [&](const char* key) { return count(require(node, key, where + "."), where + "." + key); };
  const Vec2 p = node.contains("p") ? vector<2>(node.at("p"), where + ".p") : Vec2::Zero();
  transport::BasePath path;
  if (kind == "latitude") {
    const bool radians = node.contains("theta");
    const bool degrees = node.contains("theta_degrees");
    if (radians == degrees) invalid(where, "needs exactly one of 'theta' or 'theta_degrees'");
    double theta = radians ? number(node.at("theta"), where + ".theta")
                           : number(node.at("theta_degrees"), where + ".theta_degrees") * pi / 180.0;
    if (!(theta > 0.0 && theta < pi)) invalid(where + ".theta", "must lie strictly between 0 and pi");
    const double phi0 = node.contains("phi0") ? number(node.at("phi0"), where + ".phi0") : 0.0;
    path = transport::latitude_loop(theta, steps_of("steps"), p, phi0);
  } else if (kind == "segment") {
    path = transport::segment(phase_point(require(node, "from", where + "."), where + ".from"),
                              phase_point(require(node, "to", where + "."), where + ".to"), steps_of("steps"));
  } else if (kind == "polygon") {
    const auto waypoints = points(require(node, "waypoints", where + "."), where + ".waypoints");
    if (waypoints.size() < 2) invalid(where + ".waypoints", "needs at least two points");
    bool closed = true;
    if (node.contains("closed")) {
      if (!node.at("closed").is_boolean()) invalid(where + ".closed", "must be a boolean");
      closed = node.at("closed").get<bool>();
    }
    path = transport::polygon(waypoints, p, steps_of("steps_per_edge"), closed);
  } else if (kind == "momentum_circle") {
    const double radius = number(require(node, "radius", where + "."), where + ".radius");
    if (!(radius > 0.0)) invalid(where + ".radius", "must be positive");
    path = transport::momentum_circle(vector<2>(require(node, "q", where + "."), where + ".q"),
                                      vector<2>(require(node, "center", where + "."), where + ".center"), radius,
                                      steps_of("steps"));
  } else {
    invalid(where + ".kind", "unknown path kind '" + kind + "' (latitude, segment, polygon, momentum_circle)");
  }
  path.name = name;
  if (node.contains("chart")) {
    const std::string chart = text(node.at("chart"), where + ".chart");
    if (chart == "primary") path.fixed_chart = gauge::BaseChart::Primary;
    else if (chart == "secondary") path.fixed_chart = gauge::BaseChart::Secondary;
    else if (chart != "auto") invalid(where + ".chart", "must be 'auto', 'primary' or 'secondary'");
  }
  return path;
}

inline ModelSpec parse_model(const json& node) {
  if (!node.is_object()) invalid("model", "must be an object");
  ModelSpec m;
  m.kind = text(require(node, "kind", "model."), "model.kind");
  if (m.kind == "trivial") {
  } else if (m.kind == "constant") {
    const json& c = require(node, "coefficients", "model.");
    if (!c.is_array() || c.size() != 2) invalid("model.coefficients", "must hold two 3-vectors (dq1, dq2)");
    m.c1 = vector<3>(c[0], "model.coefficients[0]");
    m.c2 = vector<3>(c[1], "model.coefficients[1]");
  } else if (m.kind == "monopole") {
    m.sign = node.contains("sign") ? integer(node.at("sign"), "model.sign") : 1;
    if (m.sign != 1 && m.sign != -1) invalid("model.sign", "must be +1 or -1");
  } else if (m.kind == "pure_gauge") {
    m.u = vector<3>(require(node, "u", "model."), "model.u");
    m.v = vector<3>(require(node, "v", "model."), "model.v");
  } else {
    invalid("model.kind", "unknown model '" + m.kind + "' (trivial, constant, monopole, pure_gauge)");
  }
  return m;
}

}  // namespace detail

/// Validates a parsed document; throws validation-error naming the field.
inline Scenario parse_scenario(const json& doc, std::string source = "<inline>") {
  if (!doc.is_object()) detail::invalid("<root>", "scenario must be a JSON object");
  static const std::vector<std::string> known{"orbit", "model", "quadrature", "paths", "section", "tolerances", "output"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) detail::invalid(key, "unknown top-level field");
  }
  Scenario s;
  s.source = std::move(source);
  s.echo = doc;
  s.two_j = detail::integer(detail::require(detail::require(doc, "orbit", ""), "two_j", "orbit."), "orbit.two_j");
  if (s.two_j < 0) detail::invalid("orbit.two_j", "must be non-negative");
  if (doc.contains("model")) s.model = detail::parse_model(doc.at("model"));
  if (doc.contains("quadrature")) {
    const json& q = doc.at("quadrature");
    if (!q.is_object()) detail::invalid("quadrature", "must be an object");
    if (q.contains("n_t")) s.n_t = detail::count(q.at("n_t"), "quadrature.n_t");
    if (q.contains("n_phi")) s.n_phi = detail::count(q.at("n_phi"), "quadrature.n_phi");
  }
  if (doc.contains("paths")) {
    const json& paths = doc.at("paths");
    if (!paths.is_object()) detail::invalid("paths", "must be an object keyed by path name");
    for (const auto& [name, node] : paths.items()) s.paths[name] = {name, node, detail::parse_path(name, node)};
  }
  if (doc.contains("section")) {
    const json& node = doc.at("section");
    if (node.contains("q_nodes")) s.section.q_nodes = detail::points(node.at("q_nodes"), "section.q_nodes");
    if (node.contains("p_nodes")) s.section.p_nodes = detail::points(node.at("p_nodes"), "section.p_nodes");
  }
  if (doc.contains("tolerances")) {
    const json& tol = doc.at("tolerances");
    if (!tol.is_object()) detail::invalid("tolerances", "must be an object");
    auto fields = s.tolerances.fields();
    for (const auto& [key, value] : tol.items()) {
      const auto it = fields.find(key);
      if (it == fields.end()) detail::invalid("tolerances." + key, "unknown tolerance");
      const double x = detail::number(value, "tolerances." + key);
      if (!(x > 0.0)) detail::invalid("tolerances." + key, "must be positive");
      *it->second = x;
    }
  }
  if (doc.contains("output")) {
    s.output = detail::text(doc.at("output"), "output");
    if (s.output != "json" && s.output != "table") detail::invalid("output", "must be 'json' or 'table'");
  }
  return s;
}

/// Reads and validates a scenario file. Relative paths that do not exist are
/// retried under $VBQUANT_CONFIG_DIR.
inline Scenario load_scenario(const std::string& file) {
  std::filesystem::path path(file);
  if (!std::filesystem::exists(path) && path.is_relative()) {
    if (const char* dir = std::getenv(config_dir_variable)) {
      const auto candidate = std::filesystem::path(dir) / path;
      if (std::filesystem::exists(candidate)) path = candidate;
    }
  }
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ValidationError, "cannot open scenario file '" + file + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return parse_scenario(doc, path.string());
}

/// Builds the gauge model; configuration-error when minimal coupling fails.
inline gauge::GaugeModel build_model(const Scenario& s) {
  const auto spec = s.orbit();
  if (s.model.kind == "constant") return gauge::constant_model(spec, s.model.c1, s.model.c2);
  if (s.model.kind == "monopole") return gauge::monopole_model(spec, s.model.sign);
  if (s.model.kind == "pure_gauge") return gauge::pure_gauge_model(spec, s.model.u, s.model.v);
  return gauge::trivial_model(spec);
}

inline const PathSpec& find_path(const Scenario& s, const std::string& name) {
  const auto it = s.paths.find(name);
  if (it == s.paths.end()) fail(ErrorKind::ValidationError, "unknown path '" + name + "' in scenario " + s.source);
  return it->second;
}

}  // namespace vbquant::scenario
