#include "cli.hpp"
#include "glra/csv.hpp"
#include "glra/model_io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using glra::Matrix;
using json = nlohmann::json;

namespace {

const fs::path kFixture = fs::path(GLRA_TEST_DATA) / "two_branch";
const fs::path kCorrupted = fs::path(GLRA_TEST_DATA) / "two_branch_corrupted";

struct Result {
  int code;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = glra::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> fixture_args(const std::string& cmd) {
  return {cmd, "--M", (kFixture / "M.csv").string(), "--B", (kFixture / "B.csv").string(),
          "--C", (kFixture / "C.csv").string(), "--rank", "1", "--no-timestamp"};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("glra_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SolveFixture) {
  auto args = fixture_args("solve");
  args.insert(args.end(), {"--out", (dir_ / "x.csv").string()});
  const Result r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.report();
  EXPECT_EQ(j["schema"], "glra/1");
  EXPECT_EQ(j["command"], "solve");
  EXPECT_NEAR(j["outputs"]["objective"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j["diagnostics"]["uniqueness"], "NonUnique");
  EXPECT_EQ(j["outputs"]["delta_variants"].size(), 3u);
  EXPECT_FALSE(j.contains("timing"));
  const Matrix x = glra::csv::read(dir_ / "x.csv");
  EXPECT_EQ(x.rows(), 3);
  EXPECT_NEAR(x.norm(), 1.0, 1e-12);
}

TEST_F(CliTest, AdjointGivesIdenticalObjective) {
  auto args = fixture_args("solve");
  const double primal = run(args).report()["outputs"]["objective"];
  args.push_back("--adjoint");
  const Result r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report()["outputs"]["objective"].get<double>(), primal);
}

TEST_F(CliTest, IdentityWeightsGiveTruncatedSvd) {
  auto rng = glra::random::engine(3);
  const Matrix m = glra::random::gaussian(4, 3, rng);
  glra::csv::write(dir_ / "M.csv", m);
  glra::csv::write(dir_ / "B.csv", Matrix::Identity(4, 4));
  glra::csv::write(dir_ / "C.csv", Matrix::Identity(3, 3));
  const Result r = run({"solve", "--M", (dir_ / "M.csv").string(), "--B",
                        (dir_ / "B.csv").string(), "--C", (dir_ / "C.csv").string(), "--rank",
                        "1", "--out", (dir_ / "x.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT((glra::csv::read(dir_ / "x.csv") - glra::truncated_svd(m, 1).reconstruct()).norm(),
            1e-12);
  EXPECT_TRUE(r.report()["timing"].contains("wall_seconds"));
}

TEST_F(CliTest, ShapeErrorNamesFileAndShape) {
  glra::csv::write(dir_ / "B.csv", Matrix::Identity(3, 3));
  const Result r = run({"solve", "--M", (kFixture / "M.csv").string(), "--B",
                        (dir_ / "B.csv").string(), "--C", (kFixture / "C.csv").string(),
                        "--rank", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("B.csv"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("expected shape 2x*"), std::string::npos) << r.err;
}

TEST_F(CliTest, ParseErrorsExitTwo) {
  EXPECT_EQ(run({"solve", "--rank", "1"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  std::ofstream(dir_ / "bad.csv") << "1,2\n3\n";
  const Result r = run({"solve", "--M", (dir_ / "bad.csv").string(), "--B",
                        (kFixture / "B.csv").string(), "--C", (kFixture / "C.csv").string(),
                        "--rank", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.csv:2"), std::string::npos) << r.err;
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ErrorCommandReportsDelta) {
  const Result r = run(fixture_args("error"));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.report();
  EXPECT_NEAR(j["outputs"]["delta"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(j["outputs"]["error"].get<double>(), 1.0, 1e-12);
  EXPECT_LT(j["outputs"]["max_discrepancy"].get<double>(), 1e-10);
}

TEST_F(CliTest, ReportFileAndDeterminism) {
  auto args = fixture_args("solve");
  args.insert(args.end(), {"--report", (dir_ / "a.json").string()});
  ASSERT_EQ(run(args).code, 0);
  args.back() = (dir_ / "b.json").string();
  ASSERT_EQ(run(args).code, 0);
  std::ifstream a(dir_ / "a.json"), b(dir_ / "b.json");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_FALSE(sa.str().empty());
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(CliTest, ToleranceFromEnvironmentAndFlagPrecedence) {
  ::setenv("GLRA_TOL_ABS", "1e-7", 1);
  auto args = fixture_args("error");
  EXPECT_EQ(run(args).report()["inputs"]["tolerances"]["check_abs"].get<double>(), 1e-7);
  args.insert(args.end(), {"--check-abs", "1e-9"});
  EXPECT_EQ(run(args).report()["inputs"]["tolerances"]["check_abs"].get<double>(), 1e-9);
  ::setenv("GLRA_TOL_ABS", "garbage", 1);
  EXPECT_EQ(run(fixture_args("error")).code, 2);
  ::unsetenv("GLRA_TOL_ABS");
}

TEST_F(CliTest, DemoUnboundedDefaultsGrowLinearly) {
  const Result r = run({"demo-unbounded", "--N", "200", "--probes", "1,10,50,100", "--csv",
                        (dir_ / "sweep.csv").string(), "--no-timestamp"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Matrix t = glra::csv::read(dir_ / "sweep.csv");
  ASSERT_EQ(t.rows(), 4);
  EXPECT_EQ(t(0, 2), 0.0);  // m = 1 lies in ker of the unbounded branch
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(t(i, 2) / t(i, 1), t(1, 2) / t(1, 1), 1e-10);
  const json j = r.report();
  EXPECT_FALSE(j["outputs"]["tie"].get<bool>());
  EXPECT_EQ(j["outputs"]["lower_bound_constant"].size(), 1u);
}

TEST_F(CliTest, DemoUnboundedTieWritesBothBranches) {
  const Result r = run({"demo-unbounded", "--N", "30,60", "--mu", "1,1", "--probes", "1,5,20",
                        "--csv", (dir_ / "sweep.csv").string(), "--no-timestamp"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.report()["outputs"]["tie"].get<bool>());
  const Matrix bounded = glra::csv::read(dir_ / "sweep.bounded.csv");
  ASSERT_EQ(bounded.rows(), 6);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(bounded(i, 2), bounded(i + 3, 2), 1e-12);
}

TEST_F(CliTest, DemoRejectsBadSpec) {
  EXPECT_EQ(run({"demo-unbounded", "--alpha-exp", "3"}).code, 2);
  EXPECT_EQ(run({"demo-unbounded", "--probes", "0"}).code, 2);
}

TEST_F(CliTest, OuterApproxDiagonalFamily) {
  const Result r = run({"outer-approx", "--diagonal", "50", "--mu", "2", "--chain", "coord",
                        "--csv", (dir_ / "conv.csv").string(), "--no-timestamp"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.report();
  EXPECT_TRUE(j["diagnostics"]["tail_strictly_decreasing"].get<bool>());
  EXPECT_NEAR(j["outputs"]["final_tail_error"].get<double>(), 0.0, 1e-10);
  const Matrix t = glra::csv::read(dir_ / "conv.csv");
  EXPECT_EQ(t.rows(), 50);
  EXPECT_EQ(t.cols(), 7);
}

TEST_F(CliTest, OuterApproxFilesAndDirections) {
  auto args = fixture_args("outer-approx");
  args.insert(args.end(), {"--chain", "auto:2", "--seed", "4"});
  Result r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.report()["outputs"]["final_tail_error"].get<double>(), 0.0, 1e-12);

  Matrix dirs(3, 2);
  dirs << 0, 1, 1, 1, 0, 0;
  glra::csv::write(dir_ / "dirs.csv", dirs);
  args = fixture_args("outer-approx");
  args.insert(args.end(), {"--chain", (dir_ / "dirs.csv").string()});
  r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(r.report()["diagnostics"]["max_tail_identity_gap"].get<double>(), 1e-10);

  dirs << 1, 0, 0, 0, 0, 1;  // second direction leaves ran(C)
  glra::csv::write(dir_ / "dirs.csv", dirs);
  EXPECT_EQ(run(args).code, 2);
  EXPECT_EQ(run({"outer-approx", "--chain", "coord"}).code, 2);
}

TEST_F(CliTest, RegressRankDeficientAndModelOut) {
  auto rng = glra::random::engine(8);
  const auto s = support::regression_data(rng, 300, 3, 5, 3);
  glra::csv::write(dir_ / "x.csv", s.xs);
  glra::csv::write(dir_ / "y.csv", s.ys);
  const Result r = run({"regress", "--x", (dir_ / "x.csv").string(), "--y",
                        (dir_ / "y.csv").string(), "--rank", "2", "--model-out",
                        (dir_ / "m.json").string(), "--no-timestamp"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.report();
  EXPECT_NEAR(j["outputs"]["mse_trace"].get<double>(), j["outputs"]["mse_monte_carlo"].get<double>(),
              1e-10);
  EXPECT_TRUE(j["diagnostics"]["maximal_kernel"]["passed"].get<bool>());
  EXPECT_EQ(j["diagnostics"]["maximal_kernel"]["kernel_dim"], 2);
  EXPECT_EQ(glra::io::load_model(dir_ / "m.json").A_hat.rows(), 3);
}

TEST_F(CliTest, RegressIdentityWeightFilesMatchUnweighted) {
  auto rng = glra::random::engine(9);
  const auto s = support::regression_data(rng, 200, 2, 3, 3);
  glra::csv::write(dir_ / "x.csv", s.xs);
  glra::csv::write(dir_ / "y.csv", s.ys);
  glra::csv::write(dir_ / "wx.csv", Matrix::Identity(2, 2));
  glra::csv::write(dir_ / "wy.csv", Matrix::Identity(3, 3));
  glra::csv::write(dir_ / "wa.csv", Matrix::Identity(2, 2));
  std::vector<std::string> base{"regress", "--x", (dir_ / "x.csv").string(), "--y",
                                (dir_ / "y.csv").string(), "--rank", "1", "--no-timestamp"};
  const json plain = run(base).report();
  base.insert(base.end(), {"--wx", (dir_ / "wx.csv").string(), "--wy", (dir_ / "wy.csv").string(),
                           "--wa", (dir_ / "wa.csv").string()});
  const Result r = run(base);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report()["outputs"]["A_hat"], plain["outputs"]["A_hat"]);
  EXPECT_EQ(r.report()["outputs"]["mse_trace"], plain["outputs"]["mse_trace"]);
}

TEST_F(CliTest, RegressFullRankIdentityData) {
  auto rng = glra::random::engine(10);
  const Matrix x = glra::random::gaussian(50, 3, rng);
  glra::csv::write(dir_ / "x.csv", x);
  glra::csv::write(dir_ / "y.csv", x);
  const Result r = run({"regress", "--x", (dir_ / "x.csv").string(), "--y",
                        (dir_ / "y.csv").string(), "--rank", "3", "--center"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(r.report()["outputs"]["mse_trace"].get<double>(), 1e-12);
}

TEST_F(CliTest, RegressMismatchedSamples) {
  glra::csv::write(dir_ / "x.csv", Matrix::Ones(4, 2));
  glra::csv::write(dir_ / "y.csv", Matrix::Ones(5, 2));
  const Result r = run({"regress", "--x", (dir_ / "x.csv").string(), "--y",
                        (dir_ / "y.csv").string(), "--rank", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("y.csv"), std::string::npos);
}

TEST_F(CliTest, CheckAllSuitesPassAndAreDeterministic) {
  const Result a = run({"check", "--trials", "5", "--seed", "3", "--no-timestamp"});
  ASSERT_EQ(a.code, 0) << a.err;
  const Result b = run({"check", "--trials", "5", "--seed", "3", "--no-timestamp"});
  EXPECT_EQ(a.out, b.out);
  const json j = a.report();
  EXPECT_EQ(j["outputs"]["suites"].size(), 5u);
  for (const auto& s : j["outputs"]["suites"]) {
    EXPECT_TRUE(s["ok"].get<bool>()) << s["suite"];
    for (const auto& i : s["invariants"]) EXPECT_EQ(i["failed"], 0) << i["name"];
  }
  EXPECT_EQ(run({"check", "--suite", "nope"}).code, 2);
}

TEST_F(CliTest, CheckFixtureAndCorruptedCopy) {
  const Result good = run({"check", "--fixture", kFixture.string(), "--no-timestamp"});
  EXPECT_EQ(good.code, 0) << good.err;
  const Result bad = run({"check", "--fixture", kCorrupted.string(), "--no-timestamp"});
  EXPECT_EQ(bad.code, 3);
  EXPECT_FALSE(bad.report()["diagnostics"]["invariant_failures"].empty());
}
