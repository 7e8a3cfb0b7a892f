#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "xrel/io.hpp"

namespace xrel {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run xrel_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() / "xrel_cli_test";
  void SetUp() override { fs::remove_all(dir); }
  void TearDown() override { fs::remove_all(dir); }
  std::string d(const std::string& rel) const { return (dir / rel).string(); }
};

TEST_F(CliTest, SizeOutputs) {
  auto r = xrel_cli({"size", "--n", "16", "--qdub", "0.048", "--out", d("s1")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("k=4 v_ub=2.40E+02"), std::string::npos) << r.out;
  r = xrel_cli({"size", "--n", "8", "--qdub", "10", "--out", d("s2")});
  EXPECT_NE(r.out.find("mted=25.5 k=4"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir / "s2" / "manifest.json"));
}

TEST_F(CliTest, SizeRejectsBadWidth) {
  const auto r = xrel_cli({"size", "--n", "1", "--qdub", "10", "--out", d("s")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("n_bits"), std::string::npos) << r.err;
  EXPECT_EQ(xrel_cli({"size", "--n", "8", "--qdub", "1", "--mted", "3"}).code, 2);
  EXPECT_EQ(xrel_cli({"size"}).code, 2);
  EXPECT_EQ(xrel_cli({"frobnicate"}).code, 2);
}

TEST_F(CliTest, SizeTable) {
  const auto r = xrel_cli({"size", "--n", "16", "--table", "--out", d("t"), "--format", "tsv"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 13);
  EXPECT_TRUE(fs::exists(dir / "t" / "size_table.tsv"));
}

TEST_F(CliTest, Bench) {
  auto r = xrel_cli({"bench", "--name", "fir64", "--out", d("fir64.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("operators=127"), std::string::npos);
  r = xrel_cli({"bench", "--name", "fir8", "--out", d("fir8.json")});
  EXPECT_NE(r.out.find("operators=15"), std::string::npos);
  EXPECT_EQ(load_dfg(dir / "fir8.json"), build_benchmark("fir8", 16));
  EXPECT_EQ(xrel_cli({"bench", "--name", "foo", "--out", d("foo.json")}).code, 2);
}

TEST_F(CliTest, DesignPlans) {
  xrel_cli({"bench", "--name", "fir8", "--out", d("fir8.json")});
  auto r = xrel_cli({"design", "--dfg", d("fir8.json"), "--k", "4", "--trials", "5000", "--out", d("k4")});
  ASSERT_EQ(r.code, 0) << r.err;
  const TruncationPlan p = load_plan(dir / "k4" / "plan.json");
  EXPECT_LE(p.predicted_v, 240.0);
  EXPECT_EQ(p.k, 4);
  EXPECT_TRUE(fs::exists(dir / "k4" / "solve_log.csv"));

  r = xrel_cli({"design", "--dfg", d("fir8.json"), "--k", "0", "--trials", "1000", "--out", d("k0")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& [id, j] : load_plan(dir / "k0" / "plan.json").assignments) EXPECT_EQ(j, 0) << id;

  r = xrel_cli({"design", "--dfg", d("fir8.json"), "--qdub", "0.048", "--trials", "1000", "--out", d("q"),
                "--profile-cache", d("cache.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_plan(dir / "q" / "plan.json").k, 4);
  EXPECT_TRUE(fs::exists(dir / "cache.json"));
}

TEST_F(CliTest, DesignInputErrors) {
  EXPECT_EQ(xrel_cli({"design", "--dfg", d("missing.json"), "--k", "4"}).code, 3);
  write_text_file(dir / "cyclic.json",
                  R"({"name":"c","nodes":[{"id":"a","kind":"input","width":8,"operands":[]},
                      {"id":"p","kind":"add","width":8,"operands":["a","q"]},
                      {"id":"q","kind":"add","width":8,"operands":["a","p"]},
                      {"id":"y","kind":"output","width":8,"operands":["q"]}]})");
  EXPECT_EQ(xrel_cli({"design", "--dfg", d("cyclic.json"), "--k", "4"}).code, 3);
  EXPECT_EQ(xrel_cli({"design", "--dfg", d("cyclic.json")}).code, 2);
}

TEST_F(CliTest, SimulateModes) {
  auto r = xrel_cli({"simulate", "--mode", "image", "--pf", "0", "--k", "4", "--image-size", "16", "--out", d("img")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = read_text_file(dir / "img" / "report.csv");
  std::istringstream lines(report);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    // MSSIM is the 10th column.
    std::istringstream cells(line);
    std::string cell;
    for (int c = 0; c < 10; ++c) std::getline(cells, cell, ',');
    EXPECT_EQ(cell, "1") << line;
    ++rows;
  }
  EXPECT_EQ(rows, 5);

  r = xrel_cli({"simulate", "--mode", "voter", "--pf", "0.05", "--k", "4", "--words", "5000", "--voters", "tmr,xrel",
                "--out", d("v")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "v" / "report_long.csv"));

  r = xrel_cli({"simulate", "--mode", "fir", "--pf", "0.01", "--k", "4", "--samples", "1000", "--out", d("f")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(xrel_cli({"simulate", "--voters", "nope", "--out", d("x")}).code, 2);
}

TEST_F(CliTest, SimulateIoFailure) {
  write_text_file(dir / "blocker", "file, not a directory");
  EXPECT_EQ(xrel_cli({"simulate", "--words", "100", "--out", d("blocker/sub")}).code, 4);
}

TEST_F(CliTest, RerunsAreByteIdenticalAndReplayable) {
  const std::vector<std::string> args{"simulate", "--mode", "voter", "--pf", "0.02,0.05", "--k", "3", "--words",
                                      "2000", "--reps", "2", "--seed", "77", "--out", d("a")};
  ASSERT_EQ(xrel_cli(args).code, 0);
  const std::string first = read_text_file(dir / "a" / "report.csv");
  const std::string manifest = read_text_file(dir / "a" / "manifest.json");
  fs::remove(dir / "a" / "report.csv");
  ASSERT_EQ(xrel_cli({"replay", d("a/manifest.json")}).code, 0);
  EXPECT_EQ(read_text_file(dir / "a" / "report.csv"), first);
  EXPECT_EQ(read_text_file(dir / "a" / "manifest.json"), manifest);
  EXPECT_EQ(xrel_cli({"replay", d("nothing.json")}).code, 3);
}

TEST_F(CliTest, SeedFromEnvironment) {
  ::setenv("XREL_SEED", "4242", 1);
  ASSERT_EQ(xrel_cli({"simulate", "--words", "500", "--out", d("e1")}).code, 0);
  ::unsetenv("XREL_SEED");
  ASSERT_EQ(xrel_cli({"simulate", "--words", "500", "--seed", "4242", "--out", d("e2")}).code, 0);
  EXPECT_EQ(read_text_file(dir / "e1" / "report.csv"), read_text_file(dir / "e2" / "report.csv"));
  // Replay of the environment-seeded run keeps its seed.
  fs::remove(dir / "e1" / "report.csv");
  ASSERT_EQ(xrel_cli({"replay", d("e1/manifest.json")}).code, 0);
  EXPECT_EQ(read_text_file(dir / "e1" / "report.csv"), read_text_file(dir / "e2" / "report.csv"));
}

}  // namespace
}  // namespace xrel
