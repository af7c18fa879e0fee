// tests/test_cli.cpp

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

using namespace potts;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "potts");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, RunWritesJsonToStdout) {
  const CliRun r = run({"run", "--n", "100", "--k", "10", "--j0", "0", "--sigma-j", "0", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const SweepResult res = sweep_result_from_json(json::parse(r.out));
  ASSERT_EQ(res.points.size(), 1u);
  EXPECT_EQ(res.points[0].stats->nd_values.size(), 10u);
  EXPECT_EQ(res.spec.base.n_firms, 100u);
}

TEST(Cli, OracleSymmetricPoint) {
  const CliRun r = run({"oracle", "--p", "0.3333333", "--q", "0.3333333"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["nd_oracle"].get<double>(), 0.202, 0.001);
  EXPECT_NEAR(doc["nd_polynomial"].get<double>(), 0.202, 0.001);
}

TEST(Cli, OracleDeviationGrid) {
  const CliRun r = run({"oracle", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 67);
  EXPECT_NE(r.err.find("max |polynomial - oracle|"), std::string::npos);
}

TEST(Cli, OracleNeedsBothProbabilities) {
  const CliRun r = run({"oracle", "--p", "0.3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--q"), std::string::npos);
}

TEST(Cli, SweepInvalidRangeIsConfigError) {
  const CliRun r = run({"sweep", "--j0-min", "0", "--j0-max", "-1", "--j0-points", "3", "--n", "10", "--k", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--j0-max"), std::string::npos);
}

TEST(Cli, SweepCsv) {
  const CliRun r = run({"sweep", "--n", "40", "--k", "4", "--j0-min", "0", "--j0-max", "0.1", "--j0-points", "3",
                        "--format", "csv", "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
  EXPECT_EQ(r.out.rfind(std::string(kCsvHeader), 0), 0u);
}

TEST(Cli, SweepOverSigma) {
  const CliRun r = run({"sweep", "--n", "40", "--k", "3", "--sigma-j-min", "0", "--sigma-j-max", "0.5",
                        "--sigma-j-points", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(sweep_result_from_json(json::parse(r.out)).spec.sweep_variable, SweepVariable::sigma_j);
  EXPECT_EQ(run({"sweep", "--n", "4", "--j0-min", "0", "--sigma-j-max", "1"}).code, 1);
}

TEST(Cli, UnknownFlagNamed) {
  const CliRun r = run({"run", "--bogus", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--bogus"), std::string::npos);
}

TEST(Cli, FieldWeightsRequireConstantMode) {
  const CliRun r = run({"run", "--n", "10", "--k", "2", "--f-down", "0.2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--f-down"), std::string::npos);
  EXPECT_EQ(run({"run", "--n", "10", "--k", "2", "--f-mode", "constant_table", "--f-down", "0.2"}).code, 0);
  EXPECT_EQ(run({"run", "--n", "10", "--k", "2", "--f-mode", "constant_table", "--f-down", "-1"}).code, 1);
}

TEST(Cli, BadChoicesAreConfigErrors) {
  EXPECT_EQ(run({"run", "--selection", "random"}).code, 1);
  EXPECT_EQ(run({"run", "--format", "xml"}).code, 1);
  EXPECT_EQ(run({"reproduce", "fig42"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(Cli, UnwritableOutputIsRuntimeError) {
  const CliRun r = run({"run", "--n", "10", "--k", "2", "--out", "/nonexistent-dir/x.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent-dir/x.json"), std::string::npos);
}

TEST(Cli, OutFileReceivesData) {
  const auto path = std::filesystem::temp_directory_path() / "potts_cli_out.csv";
  const CliRun r = run({"run", "--n", "20", "--k", "3", "--format", "csv", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, kCsvHeader);
  std::filesystem::remove(path);
}

TEST(Cli, MeanfieldAcrossTransition) {
  const CliRun r = run({"meanfield", "--n", "1000", "--j0-min", "0.001", "--j0-max", "0.01", "--j0-points", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  ASSERT_EQ(doc["rows"].size(), 2u);
  EXPECT_NEAR(doc["rows"][0]["predicted_nd_fraction"].get<double>(), 0.2019, 1e-3);
  EXPECT_LT(doc["rows"][0]["symmetric_radius"].get<double>(), 1.0);
  EXPECT_GT(doc["rows"][1]["symmetric_radius"].get<double>(), 1.0);
  EXPECT_NEAR(doc["rows"][1]["predicted_nd_fraction"].get<double>(), 1.0 / 3.0, 1e-3);
}

TEST(Cli, ReproduceDeskScale) {
  const CliRun r = run({"reproduce", "fig1", "--n", "50", "--k", "3", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(",paramagnetic,3,50,8,"), std::string::npos);
}
