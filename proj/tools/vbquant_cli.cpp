// vbquant: batch front end over the library. One subcommand per run; the
// result document goes to stdout, diagnostics to stderr.
//
// Exit codes: 0 success, 2 validation/configuration/argument error,
// 3 accuracy failure or any check beyond tolerance, 64 unknown subcommand.

#include "CLI11.hpp"
#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbquant/error.hpp"
#include "vbquant/fiber.hpp"
#include "vbquant/gauge.hpp"
#include "vbquant/report.hpp"
#include "vbquant/scenario.hpp"
#include "vbquant/transport.hpp"
#include "vbquant/verify.hpp"

namespace {

using namespace vbquant;
using json = nlohmann::json;
using report::Check;

constexpr int exit_ok = 0;
constexpr int exit_invalid = 2;
constexpr int exit_accuracy = 3;
constexpr int exit_usage = 64;

const std::vector<std::string> subcommands{"gram",      "prequant", "transition", "connection",
                                           "transport", "wilson",   "section",    "verify"};

constexpr const char* usage_text =
    "usage: vbquant <subcommand> [options]\n"
    "\n"
    "subcommands:\n"
    "  gram        monomial Gram matrix of the fiber sections\n"
    "  prequant    matrix of O(H_a) for --hamiltonian a1,a2,a3\n"
    "  transition  quantized chart transition for --element a_re,a_im,b_re,b_im\n"
    "  connection  connection matrix at --point along --tangent\n"
    "  transport   parallel transport along --path\n"
    "  wilson      holonomy of the closed loop --path\n"
    "  section     covariant-constant section on the scenario grid\n"
    "  verify      residual suites: orbit | fiber | gauge | transport | all\n"
    "\n"
    "options: --config FILE  --spin TWO_J  --hamiltonian a1,a2,a3  --point q1,q2,p1,p2\n"
    "         --tangent dq1,dq2,dp1,dp2  --path NAME  --source rep|quad  --tol X\n"
    "         --output json|table  --chart primary|secondary  --element a_re,a_im,b_re,b_im\n"
    "\n"
    "Relative --config paths are also looked up under $VBQUANT_CONFIG_DIR.\n";

struct Options {
  std::string config;
  std::optional<int> spin;
  std::vector<double> hamiltonian{0.0, 0.0, 1.0};
  std::vector<double> point;
  std::vector<double> tangent;
  std::string path;
  std::string source = "rep";
  std::optional<double> tol;
  std::string output;
  std::string chart = "primary";
  std::vector<double> element{1.0, 0.0, 0.0, 0.0};
  std::string suite = "all";
};

struct Result {
  json payload = json::object();
  std::string table;
  std::vector<Check> checks;

  void matrix(const std::string& name, const ComplexMatrix& m) {
    payload[name] = report::matrix(m);
    table += name + ":\n" + report::matrix_table(m);
  }

  void scalar(const std::string& name, double x) {
    payload[name] = x;
    table += name + ": " + report::format_number(x) + "\n";
  }

  void complex_scalar(const std::string& name, cplx z) {
    payload[name] = report::complex_entry(z);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.6f%+.6fi", z.real(), z.imag());
    table += name + ": " + buf + "\n";
  }

  void text(const std::string& name, const std::string& value) {
    payload[name] = value;
    table += name + ": " + value + "\n";
  }
};

std::vector<double> expect_size(const std::vector<double>& v, std::size_t n, const char* flag) {
  if (v.size() != n)
    fail(ErrorKind::InvalidArgument, std::string(flag) + " needs " + std::to_string(n) + " comma-separated numbers");
  return v;
}

gauge::ConnectionSource parse_source(const std::string& s) {
  return s == "quad" ? gauge::ConnectionSource::Quadrature : gauge::ConnectionSource::Representation;
}

const scenario::PathSpec& select_path(const scenario::Scenario& s, const std::string& name) {
  if (!name.empty()) return scenario::find_path(s, name);
  if (s.paths.size() == 1) return s.paths.begin()->second;
  fail(ErrorKind::ValidationError,
       s.paths.empty() ? "scenario defines no paths (use --config)" : "several paths defined; choose one with --path");
}

ComplexMatrix monopole_latitude_oracle(const scenario::Scenario& s, double theta) {
  const int n = s.two_j + 1;
  const double solid_angle = 2 * pi * (1 - std::cos(theta));
  ComplexMatrix d = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    d(k, k) = std::exp(cplx(0.0, conventions::holonomy_sign * s.model.sign * (0.5 * s.two_j - k) * solid_angle));
  return d;
}

Result run_gram(const scenario::Scenario& s) {
  Result r;
  const auto rule = s.rule();
  const auto basis = fiber::build_basis(s.orbit(), rule);
  r.matrix("gram", basis.gram);
  Eigen::VectorXd exact(basis.dimension());
  for (int k = 0; k < basis.dimension(); ++k) exact(k) = fiber::monomial_norm_squared(s.two_j, k);
  r.payload["exact_diagonal"] = report::real_vector(exact);
  r.payload["quadrature"] = {{"n_t", rule.n_t}, {"n_phi", rule.n_phi}};
  double worst = 0.0;
  for (int k = 0; k < basis.dimension(); ++k)
    for (int l = 0; l < basis.dimension(); ++l)
      worst = std::max(worst, std::abs(basis.gram(k, l) - (k == l ? exact(k) : 0.0)) / std::sqrt(exact(k) * exact(l)));
  r.checks.push_back({"gram", "relative_error", worst, s.tolerances.gram});
  return r;
}

Result run_prequant(const scenario::Scenario& s, const Options& o) {
  Result r;
  const auto a = expect_size(o.hamiltonian, 3, "--hamiltonian");
  const orbit::OrbitGeometry geom(s.orbit());
  const auto rule = s.rule();
  const auto basis = fiber::build_basis(geom.spec, rule);
  const fiber::FiberSampler sampler(basis, rule);
  const auto w = orbit::moment_hamiltonian(geom.spec, gauge::Vec3(a[0], a[1], a[2]));
  const ComplexMatrix m = fiber::prequant_matrix(geom, sampler, w).matrix;
  r.payload["hamiltonian"] = a;
  r.matrix("matrix", m);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  r.payload["eigenvalues"] = report::real_vector(solver.eigenvalues());
  r.checks.push_back({"prequant", "hermiticity", numerics::max_abs(m - m.adjoint()), s.tolerances.hermiticity});
  r.checks.push_back(
      {"prequant", "polarization_residual", fiber::polarization_residual(geom, sampler, w), s.tolerances.polarization});
  return r;
}

Result run_transition(const scenario::Scenario& s, const Options& o) {
  Result r;
  const auto e = expect_size(o.element, 4, "--element");
  su2::Matrix2 g;
  const cplx a(e[0], e[1]);
  const cplx b(e[2], e[3]);
  g << a, b, -std::conj(b), std::conj(a);
  const auto rule = s.rule();
  const auto basis = fiber::build_basis(s.orbit(), rule);
  const fiber::FiberSampler sampler(basis, rule);
  const ComplexMatrix x = fiber::quantize_transition(sampler, basis, g).matrix;
  r.payload["element"] = report::matrix(g);
  r.matrix("matrix", x);
  const int n = basis.dimension();
  r.checks.push_back(
      {"transition", "unitarity", numerics::max_abs(x.adjoint() * x - ComplexMatrix::Identity(n, n)), s.tolerances.representation});
  return r;
}

Result run_connection(const scenario::Scenario& s, const gauge::ConnectionEvaluator& eval, const Options& o) {
  Result r;
  const auto x = o.point.empty() ? std::vector<double>{0.5, 0.3, 0.0, 0.0} : expect_size(o.point, 4, "--point");
  const auto t = o.tangent.empty() ? std::vector<double>{1.0, 0.0, 0.0, 0.0} : expect_size(o.tangent, 4, "--tangent");
  const gauge::BaseChart chart = o.chart == "secondary" ? gauge::BaseChart::Secondary : gauge::BaseChart::Primary;
  const gauge::BasePoint b{chart, gauge::Vec2(x[0], x[1]), gauge::Vec2(x[2], x[3])};
  const gauge::BaseTangent v{gauge::Vec2(t[0], t[1]), gauge::Vec2(t[2], t[3])};
  const ComplexMatrix chosen = eval(parse_source(o.source), b, v);
  const ComplexMatrix quad = eval(gauge::ConnectionSource::Quadrature, b, v);
  const ComplexMatrix rep = eval(gauge::ConnectionSource::Representation, b, v);
  r.payload["point"] = x;
  r.payload["tangent"] = t;
  r.text("chart", std::string(gauge::to_string(chart)));
  r.text("source", std::string(gauge::to_string(parse_source(o.source))));
  r.matrix("matrix", chosen);
  r.checks.push_back({"connection", "anti_hermiticity", numerics::max_abs(chosen + chosen.adjoint()),
                      s.tolerances.anti_hermiticity});
  r.checks.push_back({"connection", "rep_vs_quadrature", numerics::operator_norm(quad - rep), s.tolerances.equivalence});
  return r;
}

void describe_transport(Result& r, const transport::TransportResult& t) {
  r.matrix("unitary", t.unitary);
  r.scalar("alpha_phase", t.alpha_phase);
  r.payload["steps"] = t.steps;
  r.payload["crossings"] = t.crossings;
  r.text("final_chart", std::string(gauge::to_string(t.final_chart)));
}

Result run_transport(const scenario::Scenario& s, const gauge::ConnectionEvaluator& eval, const Options& o) {
  Result r;
  const auto& spec = select_path(s, o.path);
  const auto result = transport::parallel_transport(eval, parse_source(o.source), spec.path);
  r.text("path", spec.name);
  r.text("source", std::string(gauge::to_string(parse_source(o.source))));
  describe_transport(r, result);
  r.matrix("full", result.full());
  r.checks.push_back({"transport", "unitarity", result.max_unitarity_deviation, s.tolerances.unitarity});
  return r;
}

Result run_wilson(const scenario::Scenario& s, const gauge::ConnectionEvaluator& eval, const Options& o) {
  Result r;
  const auto& spec = select_path(s, o.path);
  const auto loop = transport::wilson_loop(eval, parse_source(o.source), spec.path);
  r.text("path", spec.name);
  r.text("source", std::string(gauge::to_string(parse_source(o.source))));
  r.matrix("holonomy", loop.holonomy);
  r.complex_scalar("trace", loop.trace);
  r.scalar("alpha_phase", loop.transport.alpha_phase);
  r.payload["crossings"] = loop.transport.crossings;
  r.checks.push_back({"wilson", "unitarity", loop.transport.max_unitarity_deviation, s.tolerances.unitarity});
  if (s.model.kind == "monopole" && spec.definition.value("kind", "") == "latitude") {
    const ComplexMatrix expected = monopole_latitude_oracle(s, spec.path.start().q(0));
    r.matrix("solid_angle_law", expected);
    r.checks.push_back(
        {"wilson", "solid_angle_law", numerics::max_abs(loop.holonomy - expected), s.tolerances.holonomy});
  }
  return r;
}

Result run_section(const scenario::Scenario& s, const gauge::ConnectionEvaluator& eval) {
  Result r;
  // boundary data: e^{i q1} times the first basis row
  const auto section = transport::covariant_section_solve(eval, s.section.q_nodes, s.section.p_nodes, [&](const gauge::Vec2& q) {
    ComplexVector v = ComplexVector::Zero(eval.dimension());
    v(0) = std::exp(I_unit * q(0));
    return v;
  });
  json q_nodes = json::array();
  for (const auto& q : section.q_nodes) q_nodes.push_back({q(0), q(1)});
  json p_nodes = json::array();
  for (const auto& p : section.p_nodes) p_nodes.push_back({p(0), p(1)});
  json values = json::array();
  for (const auto& row : section.values) {
    json out = json::array();
    for (const auto& v : row) out.push_back(report::matrix(v.transpose()));
    values.push_back(std::move(out));
  }
  r.payload["q_nodes"] = q_nodes;
  r.payload["p_nodes"] = p_nodes;
  r.payload["values"] = values;
  r.table += "grid: " + std::to_string(section.q_nodes.size()) + " q nodes x " + std::to_string(section.p_nodes.size()) +
             " p nodes\n";
  r.checks.push_back({"section", "vertical_residual", section.residual, s.tolerances.section});
  return r;
}

Result run_verify(const scenario::Scenario& s, const gauge::ConnectionEvaluator& eval, const std::string& suite) {
  Result r;
  const auto append = [&](std::vector<Check> more) { r.checks.insert(r.checks.end(), more.begin(), more.end()); };
  if (suite == "orbit" || suite == "all") append(verify::orbit_suite(s));
  if (suite == "fiber" || suite == "all") append(verify::fiber_suite(s));
  if (suite == "gauge" || suite == "all") append(verify::gauge_suite(s, eval));
  if (suite == "transport" || suite == "all") append(verify::transport_suite(s, eval));
  r.payload["suite"] = suite;
  return r;
}

scenario::Scenario load(const Options& o) {
  scenario::Scenario s;
  if (!o.config.empty()) s = scenario::load_scenario(o.config);
  if (o.spin) {
    if (*o.spin < 0) fail(ErrorKind::ValidationError, "field '--spin': must be non-negative");
    s.two_j = *o.spin;
  }
  if (o.tol) {
    if (!(*o.tol > 0.0)) fail(ErrorKind::ValidationError, "field '--tol': must be positive");
    s.tolerances.override_all(*o.tol);
  }
  return s;
}

json document(const std::string& command, scenario::Scenario& s, const Result& r) {
  json doc;
  doc["version"] = report::version;
  doc["command"] = command;
  doc["conventions"] = report::conventions_snapshot();
  doc["scenario"] = {{"source", s.source},
                     {"two_j", s.two_j},
                     {"model", s.model.kind},
                     {"echo", s.echo},
                     {"tolerances", s.tolerances.to_json()}};
  doc["payload"] = r.payload;
  doc["checks"] = report::checks_json(r.checks);
  doc["passed"] = report::all_passed(r.checks);
  return doc;
}

int run(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << usage_text;
    return exit_usage;
  }
  const std::string first = argv[1];
  const bool help = first == "-h" || first == "--help";
  if (help) {
    std::cout << usage_text;
    return exit_ok;
  }
  if (first == "--version") {
    std::cout << report::version << "\n";
    return exit_ok;
  }
  if (std::find(subcommands.begin(), subcommands.end(), first) == subcommands.end()) {
    std::cerr << "unknown subcommand '" << first << "'\n" << usage_text;
    return exit_usage;
  }

  Options o;
  CLI::App app{"vbquant", "vbquant"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--config", o.config, "scenario JSON file");
  app.add_option("--spin", o.spin, "two_j of the fiber orbit");
  app.add_option("--hamiltonian", o.hamiltonian, "moment coefficients a1,a2,a3")->delimiter(',');
  app.add_option("--point", o.point, "base point q1,q2,p1,p2")->delimiter(',');
  app.add_option("--tangent", o.tangent, "tangent dq1,dq2,dp1,dp2")->delimiter(',');
  app.add_option("--path", o.path, "path name from the scenario");
  app.add_option("--source", o.source, "connection source")->check(CLI::IsMember({"rep", "quad"}));
  app.add_option("--tol", o.tol, "override every tolerance");
  app.add_option("--output", o.output, "output format")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--chart", o.chart, "base chart for connection")->check(CLI::IsMember({"primary", "secondary"}));
  app.add_option("--element", o.element, "SU(2) element a_re,a_im,b_re,b_im")->delimiter(',');
  for (const auto& name : subcommands) {
    auto* sub = app.add_subcommand(name);
    if (name == "verify")
      sub->add_option("suite", o.suite, "suite to run")
          ->check(CLI::IsMember({"orbit", "fiber", "gauge", "transport", "all"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "validation-error: " << e.what() << "\n";
    return exit_invalid;
  }
  const std::string command = first;

  try {
    scenario::Scenario s = load(o);
    const std::string output = o.output.empty() ? s.output : o.output;
    Result r;
    if (command == "gram") r = run_gram(s);
    else if (command == "prequant") r = run_prequant(s, o);
    else if (command == "transition") r = run_transition(s, o);
    else {
      const gauge::ConnectionEvaluator eval(scenario::build_model(s), s.rule());
      if (command == "connection") r = run_connection(s, eval, o);
      else if (command == "transport") r = run_transport(s, eval, o);
      else if (command == "wilson") r = run_wilson(s, eval, o);
      else if (command == "section") r = run_section(s, eval);
      else r = run_verify(s, eval, o.suite);
    }
    std::string out;
    if (output == "table") {
      out = std::string(report::version) + "  " + command + "  two_j=" + std::to_string(s.two_j) + "  model=" +
            s.model.kind + "\n" + r.table;
      if (!r.checks.empty()) out += report::checks_table(r.checks);
    } else {
      out = report::serialize(document(command, s, r));
    }
    std::fwrite(out.data(), 1, out.size(), stdout);
    std::fflush(stdout);
    return report::all_passed(r.checks) ? exit_ok : exit_accuracy;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == ErrorKind::AccuracyFailure ? exit_accuracy : exit_invalid;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation-error: " << e.what() << "\n";
    return exit_invalid;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
