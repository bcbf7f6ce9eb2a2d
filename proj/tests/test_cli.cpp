#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpcg/cli.hpp"

namespace fs = std::filesystem;
using namespace dpcg;

namespace {

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dpcg");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const char* name) { return std::string(DPCG_FIXTURE_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("dpcg_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json certificate(const fs::path& dir) { return Json::parse(slurp(dir / "certificate.json")); }

}  // namespace

TEST(Cli, ZeroProblemSolves) {
  const auto dir = scratch("zero");
  const CliRun r = invoke({"solve", fixture("zero.json"), "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kGeneralized) << r.err;
  const auto rows = cli::read_trace_csv(dir / "trace.csv");
  ASSERT_EQ(rows.size(), 4U);
  for (const auto& row : rows) {
    EXPECT_EQ(row.rho, 0.0);
    EXPECT_EQ(row.pi, 0.0);
    EXPECT_EQ(row.pi_prime, 0.0);
  }
  const Json c = certificate(dir);
  EXPECT_TRUE(c["solution"]["generalized"].get<bool>());
  EXPECT_TRUE(fs::exists(dir / "report.txt"));
  EXPECT_TRUE(fs::exists(dir / "solution_3.txt"));
}

TEST(Cli, VerifyStoredZeroTrace) {
  const auto dir = scratch("zero_verify");
  ASSERT_EQ(invoke({"solve", fixture("zero.json"), "--out", dir.string()}).code, 0);
  const auto vdir = scratch("zero_verify_out");
  const CliRun r = invoke({"verify", fixture("zero.json"), "--out", vdir.string(), "--trace-dir", dir.string()});
  EXPECT_EQ(r.code, cli::kGeneralized) << r.err;
  EXPECT_TRUE(certificate(vdir)["solution"]["generalized"].get<bool>());
  EXPECT_EQ(r.err.find("warning"), std::string::npos);
}

TEST(Cli, ManufacturedTraceHasSecondOrderErrors) {
  const auto dir = scratch("manufactured");
  const CliRun r = invoke({"solve", fixture("manufactured_poisson.json"), "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kGeneralized) << r.err;
  const ProblemSpec spec = load_problem(fixture("manufactured_poisson.json"));
  const GalerkinHierarchy h(*spec.base_mesh, spec.settings.levels);
  auto exact = [](const Point& z) { return std::sin(0.5 * std::acos(-1.0) * z[0]); };
  double prev = 0.0;
  for (std::size_t l = 0; l < h.size(); ++l) {
    const auto s = cli::read_solution(dir / ("solution_" + std::to_string(l) + ".txt"), h.space(l), spec.reactions);
    const double e = l2_error(s.u, h.space(l), exact);
    if (l > 0) {
      EXPECT_GE(prev / e, 3.5);
      EXPECT_LE(prev / e, 4.5);
    }
    prev = e;
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(invoke({"solve", fixture("coercivity_fail.json"), "--out", (dir / "a").string()}).code,
            cli::kValidatorRejected);
  const CliRun g = invoke({"validate", fixture("growth_violation.json"), "--out", (dir / "b").string()});
  EXPECT_EQ(g.code, cli::kValidatorRejected);
  EXPECT_NE(g.out.find("growth violation: h1 at z="), std::string::npos) << g.out;
  EXPECT_NE(g.out.find("r1="), std::string::npos);
  EXPECT_EQ(invoke({"solve", fixture("missing.json"), "--out", (dir / "c").string()}).code, cli::kInputError);
  EXPECT_EQ(invoke({"bogus"}).code, cli::kInputError);
  EXPECT_EQ(invoke({"validate", fixture("competing.json"), "--out", (dir / "d").string()}).code, cli::kGeneralized);
  // Waiving proceeds past the rejected coercivity condition.
  const CliRun w = invoke({"solve", fixture("coercivity_fail.json"), "--out", (dir / "e").string(),
                        "--waive-certificates", "--levels", "3"});
  EXPECT_NE(w.code, cli::kValidatorRejected);
  EXPECT_NE(w.code, cli::kInputError);
  EXPECT_TRUE(certificate(dir / "e")["validation"]["waived"].get<bool>());
}

TEST(Cli, ConstantsOnIntervalFixture) {
  const auto dir = scratch("constants");
  const CliRun r = invoke({"constants", fixture("manufactured_poisson.json"), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json c = Json::parse(slurp(dir / "constants.json"));
  EXPECT_NEAR(c["lambda1"].get<double>(), 2.0 / std::acos(-1.0), 0.01 * 0.63662);
  EXPECT_NEAR(c["lambda2"].get<double>(), 1.0, 0.01);
  EXPECT_NE(r.out.find("lambda1 = "), std::string::npos);
}

TEST(Cli, SolveIsDeterministicAndVerifyRoundTrips) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  ASSERT_EQ(invoke({"solve", fixture("interval_inclusion.json"), "--out", a.string()}).code, 0);
  ASSERT_EQ(invoke({"solve", fixture("interval_inclusion.json"), "--out", b.string()}).code, 0);
  EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
  EXPECT_EQ(slurp(a / "certificate.json"), slurp(b / "certificate.json"));
  const auto v = scratch("det_v");
  ASSERT_EQ(invoke({"verify", fixture("interval_inclusion.json"), "--out", v.string(), "--trace-dir", a.string()}).code,
            0);
  EXPECT_EQ(slurp(v / "certificate.json"), slurp(a / "certificate.json"));
}

TEST(Cli, SeedOverrideChangesValidationSamples) {
  const auto a = scratch("seed_a");
  const auto b = scratch("seed_b");
  ASSERT_EQ(invoke({"validate", fixture("growth_violation.json"), "--out", a.string(), "--seed", "5"}).code, 3);
  ASSERT_EQ(invoke({"validate", fixture("growth_violation.json"), "--out", b.string(), "--seed", "6"}).code, 3);
  const Json ja = Json::parse(slurp(a / "validation.json"));
  const Json jb = Json::parse(slurp(b / "validation.json"));
  EXPECT_NE(ja.dump(), jb.dump());
}

TEST(Problem, SchemaErrors) {
  const Json base = Json::parse(slurp(fixture("zero.json")));
  EXPECT_NO_THROW((void)parse_problem(base));
  Json extra = base;
  extra["unexpected"] = 1;
  EXPECT_THROW((void)parse_problem(extra), InvalidInput);
  Json bad_expr = base;
  bad_expr["reactions"]["h1"] = {{"value", "1 +"}};
  EXPECT_THROW((void)parse_problem(bad_expr), InvalidInput);
  Json wrong_var = base;
  wrong_var["boundary_maps"]["g1"] = {{"value", "n1"}};  // boundary maps see no gradients
  EXPECT_THROW((void)parse_problem(wrong_var), InvalidInput);
  Json ordering = base;
  ordering["exponents"]["p2"] = 5.0;
  EXPECT_THROW((void)parse_problem(ordering), InvalidInput);
}

TEST(Cli, SolvedLevelsRespectTheAPrioriBound) {
  const auto dir = scratch("a_priori");
  const CliRun r = invoke({"solve", fixture("competing.json"), "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kGeneralized) << r.err;
  const Json c = certificate(dir);
  ASSERT_TRUE(c["validation"]["passed"].get<bool>());
  const Json& levels = c["a_priori"];
  ASSERT_EQ(levels.size(), 4U);
  for (const auto& l : levels) EXPECT_LE(l["value"].get<double>(), 1e-6) << l.dump();
}
