#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "avs/cli/cli.hpp"
#include "avs/core/tensor_io.hpp"
#include "avs/scaling/scaling.hpp"

using namespace avs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("avs_cli_test_" + std::to_string(::getpid()) + "_" +
                                         ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  cli::CommandResult result;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.result = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.result.exit_code, 1);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({}).result.exit_code, 1);
}

TEST(Cli, MissingRequiredFlagIsUsageError) {
  EXPECT_EQ(run({"eval", "--pred", "x.avst"}).result.exit_code, 1);
  EXPECT_EQ(run({"train-relative", "--data", "d", "--out", "o", "--scales", "5"}).result.exit_code, 1);
}

TEST(Cli, RuntimeFailureExitsTwo) {
  TempDir t;
  const auto r = run({"eval", "--pred", (t.path / "missing.avst").string(), "--gt", (t.path / "gt.avst").string()});
  EXPECT_EQ(r.result.exit_code, 2);
  EXPECT_TRUE(r.result.artifacts.empty());
}

TEST(Cli, EvalOnIdenticalMapsIsPerfect) {
  TempDir t;
  Tensor<float> d({4, 5});
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 0.5f + 0.3f * static_cast<float>(i);
  write_avst(t.path / "a.avst", d);
  const auto r = run({"eval", "--pred", (t.path / "a.avst").string(), "--gt", (t.path / "a.avst").string(), "--out",
                      (t.path / "eval.txt").string()});
  ASSERT_EQ(r.result.exit_code, 0) << r.err;
  const std::string expected =
      "abs_rel sq_rel rmse rmse_log delta1 delta2 delta3\n"
      "0.000000 0.000000 0.000000 0.000000 1.000000 1.000000 1.000000\n";
  EXPECT_EQ(r.out, expected);
  EXPECT_EQ(slurp(t.path / "eval.txt"), expected);
}

TEST(Cli, ScaleWritesMedianScaledMapAndFactor) {
  TempDir t;
  Tensor<double> rel({2, 2}, {1, 2, 3, 4}), pse({2, 2}, {5, 5, 5, 5});
  write_avst(t.path / "r.avst", rel);
  write_avst(t.path / "m.avst", pse);
  const auto r = run({"scale", "--relative", (t.path / "r.avst").string(), "--pseudo", (t.path / "m.avst").string(),
                      "--out", (t.path / "s.avst").string()});
  ASSERT_EQ(r.result.exit_code, 0) << r.err;
  const auto s = read_avst<double>(t.path / "s.avst");
  // median(R) = 2.5, so s = 2.
  EXPECT_DOUBLE_EQ(s[0], 2.0);
  EXPECT_DOUBLE_EQ(s[3], 8.0);
  const auto f = scaling::ScaleFactor::parse(slurp(t.path / "s.scale.txt"));
  EXPECT_DOUBLE_EQ(f.s, 2.0);
  EXPECT_EQ(run({"scale", "--relative", "a", "--pseudo", "b", "--out", "c", "--method", "mode"}).result.exit_code, 1);
}

TEST(Cli, SynthDataIsBytewiseDeterministic) {
  TempDir t;
  const std::vector<std::string> sz{"--set", "data.height=32", "--set", "data.width=64"};
  auto synth = [&](const fs::path& out) {
    std::vector<std::string> a{"synth-data", "--out", out.string(), "--scenes", "3", "--frames", "4", "--seed", "9"};
    a.insert(a.end(), sz.begin(), sz.end());
    return run(a);
  };
  const auto a = synth(t.path / "a"), b = synth(t.path / "b");
  ASSERT_EQ(a.result.exit_code, 0) << a.err;
  ASSERT_EQ(b.result.exit_code, 0) << b.err;
  ASSERT_EQ(a.result.artifacts.size(), b.result.artifacts.size());
  ASSERT_EQ(a.result.artifacts.size(), 3u * 4u * 3u + 2u);  // rgb, depth, wav per sample + manifest + intrinsics
  for (std::size_t i = 0; i < a.result.artifacts.size(); ++i)
    EXPECT_EQ(slurp(a.result.artifacts[i]), slurp(b.result.artifacts[i])) << a.result.artifacts[i];
}

TEST(Cli, BadPrecisionIsUsageError) {
  ::setenv("AVS_PRECISION", "f16", 1);
  const auto r = run({"eval", "--pred", "a", "--gt", "b"});
  ::unsetenv("AVS_PRECISION");
  EXPECT_EQ(r.result.exit_code, 1);
}

TEST(Cli, ReportWritesTableAndCharts) {
  TempDir t;
  std::ofstream(t.path / "rgb.txt") << "abs_rel sq_rel rmse rmse_log delta1 delta2 delta3\n0.3 0.2 1 0.4 0.5 0.7 0.9\n";
  std::ofstream(t.path / "echo.txt") << "abs_rel sq_rel rmse rmse_log delta1 delta2 delta3\n0.1 0.1 0.5 0.2 0.9 1 1\n";
  const auto r = run({"report", "--inputs", (t.path / "rgb.txt").string(), (t.path / "echo.txt").string(), "--out",
                      (t.path / "rep").string()});
  ASSERT_EQ(r.result.exit_code, 0) << r.err;
  EXPECT_EQ(r.result.artifacts.size(), 8u);
  EXPECT_NE(slurp(t.path / "rep" / "table.txt").find("echo"), std::string::npos);
  EXPECT_NE(slurp(t.path / "rep" / "delta1.svg").find("<svg"), std::string::npos);
}
