#pragma once

// Result documents: deterministic JSON (sorted keys, %.17g floats, complex
// entries as [re, im]) and a plain-text table rendering.

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "vbquant/conventions.hpp"
#include "vbquant/numerics.hpp"

namespace vbquant::report {

using json = nlohmann::json;

inline constexpr const char* version = "vbquant 0.1.0";

inline json complex_entry(cplx z) { return json::array({z.real(), z.imag()}); }

inline json matrix(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_entry(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json real_vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline json conventions_snapshot() {
  return {{"symplectic_sign", conventions::symplectic_sign},
          {"poisson_sign", conventions::poisson_sign},
          {"dirac_sign", conventions::dirac_sign},
          {"holonomy_sign", conventions::holonomy_sign},
          {"coadjoint_reflected_axis", conventions::coadjoint_reflected_axis},
          {"transition_phase_sign", conventions::transition_phase_sign},
          {"generator_normalization", "tau_a = -(i/2) sigma_a"},
          {"row_vector_transport", true}};
}

/// One residual checked against a tolerance. Lower-bound checks pass when the
/// value is at least the tolerance (used for sensitivity witnesses).
struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool lower_bound = false;

  bool passed() const { return lower_bound ? value >= tolerance : value <= tolerance; }

  json to_json() const {
    return {{"suite", suite}, {"check", name},          {"value", value},
            {"tolerance", tolerance}, {"bound", lower_bound ? "min" : "max"}, {"passed", passed()}};
  }
};

inline json checks_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const auto& c : checks) out.push_back(c.to_json());
  return out;
}

inline bool all_passed(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.passed()) return false;
  return true;
}

namespace detail {

inline void write_number(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

inline void write(std::string& out, const json& node, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* newline = indent > 0 ? "\n" : "";
  switch (node.type()) {
    case json::value_t::object: {
      if (node.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += newline;
      bool first = true;
      for (const auto& [key, value] : node.items()) {  // std::map: sorted
        if (!first) {
          out += ",";
          out += newline;
        }
        first = false;
        out += pad + json(key).dump() + (indent > 0 ? ": " : ":");
        write(out, value, indent, depth + 1);
      }
      out += newline + close + "}";
      return;
    }
    case json::value_t::array: {
      // numeric leaves stay on one line
      bool flat = true;
      for (const auto& v : node)
        if (v.is_structured()) flat = false;
      flat = flat || (node.size() == 2 && node[0].is_number() && node[1].is_number());
      if (node.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      bool first = true;
      for (const auto& v : node) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) out += newline + pad;
        first = false;
        write(out, v, flat ? 0 : indent, depth + 1);
      }
      if (!flat) out += newline + close;
      out += "]";
      return;
    }
    case json::value_t::number_float:
      write_number(out, node.get<double>());
      return;
    default:
      out += node.dump();
  }
}

}  // namespace detail

/// Deterministic serialization; byte-identical for identical documents.
inline std::string serialize(const json& doc, int indent = 2) {
  std::string out;
  detail::write(out, doc, indent, 0);
  out += "\n";
  return out;
}

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

inline std::string checks_table(const std::vector<Check>& checks) {
  std::ostringstream os;
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.suite.size() + c.name.size() + 1);
  os << std::string(width - 5, ' ') << "check" << "  " << "         value" << "  " << "     tolerance" << "  result\n";
  for (const auto& c : checks) {
    const std::string label = c.suite + "." + c.name;
    os << std::string(width - label.size(), ' ') << label << "  " << std::string(14 - format_number(c.value).size(), ' ')
       << format_number(c.value) << "  " << (c.lower_bound ? ">=" : "<=") << std::string(12 - format_number(c.tolerance).size(), ' ')
       << format_number(c.tolerance) << "  " << (c.passed() ? "pass" : "FAIL") << "\n";
  }
  return os.str();
}

inline std::string matrix_table(const ComplexMatrix& m) {
  std::ostringstream os;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%+.6f%+.6fi", m(r, c).real(), m(r, c).imag());
      os << (c ? "  " : "") << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace vbquant::report
