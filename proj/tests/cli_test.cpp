#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "json.hpp"
#include "vbquant/report.hpp"
#include "vbquant/scenario.hpp"

using namespace vbquant;
using json = nlohmann::json;

namespace {

const std::string scenarios = std::string(VBQUANT_SOURCE_DIR) + "/scenarios/";

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun run_cli(const std::string& args, const std::string& env = "") {
  const std::string command = env + " '" + std::string(VBQUANT_CLI_PATH) + "' " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

cplx entry(const json& m, int r, int c) { return {m[r][c][0].get<double>(), m[r][c][1].get<double>()}; }

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(Scenario, MinimalScenarioIsValid) {
  const auto s = scenario::parse_scenario(json::parse(R"({"orbit": {"two_j": 1}, "model": {"kind": "trivial"}})"));
  EXPECT_EQ(s.two_j, 1);
  EXPECT_EQ(s.model.kind, "trivial");
  EXPECT_NO_THROW(scenario::build_model(s));
}

TEST(Scenario, NegativeSpinIsAValidationError) {
  try {
    scenario::parse_scenario(json::parse(R"({"orbit": {"two_j": -1}})"));
    FAIL() << "accepted two_j = -1";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
    EXPECT_NE(std::string(e.what()).find("orbit.two_j"), std::string::npos);
  }
}

TEST(Scenario, DiagnosticsNameTheOffendingField) {
  const std::pair<const char*, const char*> cases[] = {
      {R"({"orbit": {"two_j": 1}, "colour": 1})", "colour"},
      {R"({"orbit": {"two_j": 1}, "model": {"kind": "monopole", "sign": 2}})", "model.sign"},
      {R"({"orbit": {"two_j": 1}, "tolerances": {"gram": -1}})", "tolerances.gram"},
      {R"({"orbit": {"two_j": 1}, "tolerances": {"nonsense": 1}})", "tolerances.nonsense"},
      {R"({"orbit": {"two_j": 1}, "paths": {"a": {"kind": "latitude", "theta": 4, "steps": 10}}})", "paths.a.theta"},
      {R"({"orbit": {"two_j": 1}, "paths": {"a": {"kind": "segment", "from": {"q": [0, 0]}, "steps": 10}}})",
       "paths.a.to"},
      {R"({"orbit": {"two_j": 1}, "paths": {"a": {"kind": "spiral"}}})", "paths.a.kind"},
      {R"({"orbit": {"two_j": 1}, "quadrature": {"n_t": 0}})", "quadrature.n_t"},
      {R"({"orbit": {"two_j": 1.5}})", "orbit.two_j"},
  };
  for (const auto& [doc, field] : cases) {
    try {
      scenario::parse_scenario(json::parse(doc));
      ADD_FAILURE() << "accepted " << doc;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ValidationError) << doc;
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
}

TEST(Scenario, MonopoleScenarioLoadsWithDefaultTolerances) {
  const auto s = scenario::load_scenario(scenarios + "monopole.json");
  EXPECT_EQ(s.model.kind, "monopole");
  EXPECT_EQ(s.tolerances.holonomy, scenario::Tolerances{}.holonomy);
  EXPECT_EQ(s.echo.at("orbit").at("two_j"), 2);
  EXPECT_NO_THROW(scenario::find_path(s, "lat60"));
  EXPECT_THROW(scenario::find_path(s, "lat61"), Error);
}

TEST(Scenario, MalformedJsonIsAParseError) {
  const auto path = write_temp("broken.json", "{\"orbit\": ");
  try {
    scenario::load_scenario(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  }
}

TEST(Report, SerializationIsSortedAndFullPrecision) {
  json doc = {{"b", 0.1}, {"a", {1.0 / 3.0, 2.0}}};
  const std::string text = report::serialize(doc);
  EXPECT_LT(text.find("\"a\""), text.find("\"b\""));
  EXPECT_NE(text.find("0.33333333333333331"), std::string::npos);
  EXPECT_NE(text.find("0.10000000000000001"), std::string::npos);
  EXPECT_EQ(json::parse(text)["a"][0].get<double>(), 1.0 / 3.0);
}

TEST(Report, LowerBoundChecks) {
  EXPECT_TRUE((report::Check{"s", "n", 2.0, 1.0, true}).passed());
  EXPECT_FALSE((report::Check{"s", "n", 2.0, 1.0, false}).passed());
}

TEST(Cli, PrequantSpinOneHalfMatrix) {
  const CliRun r = run_cli("prequant --spin 1 --hamiltonian 0,0,1");
  ASSERT_EQ(r.status, 0);
  const json doc = json::parse(r.out);
  const json& m = doc["payload"]["matrix"];
  ASSERT_EQ(m.size(), 2u);
  EXPECT_NEAR(std::abs(entry(m, 0, 0) - 0.5), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(entry(m, 1, 1) + 0.5), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(entry(m, 0, 1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(entry(m, 1, 0)), 0.0, 1e-12);
  EXPECT_EQ(doc["conventions"]["dirac_sign"], conventions::dirac_sign);
  EXPECT_EQ(doc["version"], report::version);
}

TEST(Cli, EveryCheckCarriesItsTolerance) {
  const CliRun r = run_cli("verify fiber --spin 2");
  ASSERT_EQ(r.status, 0);
  const json doc = json::parse(r.out);
  ASSERT_FALSE(doc["checks"].empty());
  for (const auto& c : doc["checks"]) {
    EXPECT_TRUE(c.contains("tolerance"));
    EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
  }
}

TEST(Cli, VerifyAllOnTrivialScenario) {
  const CliRun r = run_cli("verify all --config '" + scenarios + "trivial.json'");
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(json::parse(r.out)["passed"].get<bool>());
}

TEST(Cli, WilsonLoopFollowsSolidAngleLaw) {
  const CliRun r = run_cli("wilson --config '" + scenarios + "monopole.json' --path lat60");
  ASSERT_EQ(r.status, 0);
  const json doc = json::parse(r.out);
  const json& h = doc["payload"]["holonomy"];
  // two_j = 2, solid angle pi: phases exp(i m pi) for m = 1, 0, -1
  const double expected[] = {-1.0, 1.0, -1.0};
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(std::abs(entry(h, k, k) - expected[k]), 0.0, 1e-6);
    for (int l = 0; l < 3; ++l)
      if (l != k) EXPECT_NEAR(std::abs(entry(h, k, l)), 0.0, 1e-6);
  }
}

TEST(Cli, ConfigDirectoryFromEnvironment) {
  const CliRun r = run_cli("gram --config trivial.json", "cd / && VBQUANT_CONFIG_DIR='" + scenarios + "'");
  EXPECT_EQ(r.status, 0);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("gram --spin -1").status, 2);
  EXPECT_EQ(run_cli("gram --config '" + write_temp("neg.json", R"({"orbit": {"two_j": -1}})") + "'").status, 2);
  EXPECT_EQ(run_cli("gram --config '" + write_temp("bad.json", "{\"orbit\":") + "'").status, 2);
  EXPECT_EQ(run_cli("gram --config /nonexistent/file.json").status, 2);
  EXPECT_EQ(run_cli("prequant --hamiltonian 1,2").status, 2);
  EXPECT_EQ(run_cli("transition --element 1,1,0,0").status, 2);
  EXPECT_EQ(run_cli("connection --source sideways").status, 2);
  EXPECT_EQ(run_cli("transport --spin 1").status, 2);
  EXPECT_EQ(run_cli("verify galaxy").status, 2);
  EXPECT_EQ(run_cli("frobnicate").status, 64);
  EXPECT_EQ(run_cli("").status, 64);
  // a tolerance below round-off must fail the gate
  EXPECT_EQ(run_cli("gram --spin 6 --tol 1e-30").status, 3);
}

TEST(Cli, SecondaryChartOnSingleChartModelIsRejected) {
  EXPECT_EQ(run_cli("connection --spin 1 --chart secondary").status, 2);
}

TEST(Cli, OutputIsByteIdenticalAcrossRuns) {
  const std::string args = "verify gauge --config '" + scenarios + "constant.json'";
  const CliRun a = run_cli(args);
  const CliRun b = run_cli(args);
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  const CliRun t1 = run_cli("transport --config '" + scenarios + "constant.json' --path square --output table");
  const CliRun t2 = run_cli("transport --config '" + scenarios + "constant.json' --path square --output table");
  ASSERT_EQ(t1.status, 0);
  EXPECT_EQ(t1.out, t2.out);
}

TEST(Cli, SourcesAgreeOnTransport) {
  const std::string base = "transport --config '" + scenarios + "monopole.json' --path lat120 --source ";
  const json rep = json::parse(run_cli(base + "rep").out)["payload"]["unitary"];
  const json quad = json::parse(run_cli(base + "quad").out)["payload"]["unitary"];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(std::abs(entry(rep, r, c) - entry(quad, r, c)), 0.0, 1e-6);
}

TEST(Cli, SectionIsConstantInMomentum) {
  const CliRun r = run_cli("section --config '" + scenarios + "trivial.json'");
  ASSERT_EQ(r.status, 0);
  const json doc = json::parse(r.out);
  const json& values = doc["payload"]["values"];
  for (const auto& row : values)
    for (const auto& v : row) EXPECT_EQ(v, row[0]);
}
