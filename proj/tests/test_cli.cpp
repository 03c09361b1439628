#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "slerho/cli.hpp"

using namespace slerho;
namespace fs = std::filesystem;

namespace {

std::string env_or_skip(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("slerho_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the binary from the scratch directory and returns its exit status.
  int run(const std::string& args) {
    const std::string bin = env_or_skip("SLE_RHO_BIN");
    const std::string cmd = "cd '" + dir_.string() + "' && '" + bin + "' " + args + " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path write(const std::string& name, const std::string& text) {
    write_file(dir_ / name, text);
    return dir_ / name;
  }

  static json manifest(const fs::path& out) { return json::parse(read_file(out / "manifest.json")); }

  fs::path dir_;
};

}  // namespace

TEST(CliInProcess, WeightsExample) {
  RunConfig cfg = parse_config(R"({"command": "weights", "params": {"kappa": 4, "rho": [-1], "x": [-1]},
                                   "mc": {"seed": 1}, "output": {"formats": ["json"]}})");
  const fs::path out = fs::temp_directory_path() / ("slerho_weights_" + std::to_string(::getpid()));
  cfg.output.directory = out.string();
  std::ostringstream log;
  const auto res = cli::run(cfg, 1, log);
  EXPECT_EQ(res.exit_code, 0);
  const auto& pts = res.result["points"];
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_DOUBLE_EQ(pts[0]["delta"].get<double>(), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(res.result["rho_infinity"].get<double>(), -1.0);
  EXPECT_DOUBLE_EQ(pts[0]["angle"].get<double>(), -std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(pts[1]["angle"].get<double>(), -std::numbers::pi / 2);
  EXPECT_NEAR(res.result["ledger"]["sum"].get<double>(), 0.0, 1e-15);
  EXPECT_EQ(res.manifest["verdict"], "pass");
  EXPECT_TRUE(fs::exists(out / "weights.json"));
  EXPECT_FALSE(fs::exists(out / "weights.csv"));
  fs::remove_all(out);
}

TEST(CliInProcess, FailureReportCarriesField) {
  const auto j = cli::failure_report(ConfigError("params.kappa", "required"));
  EXPECT_EQ(j["error_type"], "config");
  EXPECT_EQ(j["field"], "params.kappa");
  EXPECT_EQ(cli::failure_report(DomainError("x"))["error_type"], "domain");
}

TEST_F(CliTest, VirasoroCheckPasses) {
  if (env_or_skip("SLE_RHO_BIN").empty()) GTEST_SKIP() << "SLE_RHO_BIN not set";
  write("v.json", R"({"params": {"kappa": 6}})");
  ASSERT_EQ(run("virasoro-check --config v.json --seed 3 --out v"), 0);
  const auto m = manifest(dir_ / "v");
  EXPECT_EQ(m["verdict"], "pass");
  EXPECT_EQ(m["command"], "virasoro-check");
  EXPECT_EQ(m["seed"], 3);
  EXPECT_TRUE(fs::exists(dir_ / "v" / "virasoro.json"));
  EXPECT_TRUE(fs::exists(dir_ / "v" / "kac_table.csv"));
}

TEST_F(CliTest, LppRefusesKappaBelowWindow) {
  if (env_or_skip("SLE_RHO_BIN").empty()) GTEST_SKIP() << "SLE_RHO_BIN not set";
  write("l.json", R"({"params": {"kappa": 3, "rho": [0.0], "x": [-1]}})");
  EXPECT_EQ(run("lpp --config l.json --seed 1 --out l"), 2);
  const auto failure = json::parse(read_file(dir_ / "l" / "failure.json"));
  EXPECT_EQ(failure["kind"], "failure");
  EXPECT_NE(failure["message"].get<std::string>().find("kappa > 4"), std::string::npos);
  EXPECT_NE(read_file(dir_ / "stderr.txt").find("kappa > 4"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "l" / "manifest.json"));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  if (env_or_skip("SLE_RHO_BIN").empty()) GTEST_SKIP() << "SLE_RHO_BIN not set";
  write("bad.json", R"({"params": {"kappa": 6, "rho": [1, 2], "x": [1]}})");
  EXPECT_EQ(run("simulate --config bad.json"), 2);
  const auto err = json::parse(read_file(dir_ / "stderr.txt"));
  EXPECT_EQ(err["field"], "params.rho/params.x");
  EXPECT_NE(run("simulate"), 0);
  EXPECT_NE(run("fly --config bad.json"), 0);
  EXPECT_NE(run("simulate --config missing.json"), 0);
}

TEST_F(CliTest, ManifestRerunIsBitIdentical) {
  if (env_or_skip("SLE_RHO_BIN").empty()) GTEST_SKIP() << "SLE_RHO_BIN not set";
  write("s.json", R"({"params": {"kappa": 6, "rho": [0.5], "x": [-1]}, "numerics": {"horizon": 0.5},
                      "mc": {"n_paths": 20}})");
  ASSERT_EQ(run("simulate --config s.json --threads 4 --out a"), 0);
  const auto first = manifest(dir_ / "a");
  ASSERT_TRUE(first["seed"].is_number_unsigned());
  ASSERT_EQ(run("simulate --config a/manifest.json --threads 1 --out b"), 0);
  const auto second = manifest(dir_ / "b");
  EXPECT_EQ(first["seed"], second["seed"]);
  ASSERT_EQ(first["artifacts"].size(), 3u);
  EXPECT_EQ(first["artifacts"], second["artifacts"]);
  EXPECT_EQ(read_file(dir_ / "a" / "paths.csv"), read_file(dir_ / "b" / "paths.csv"));
  // The input hash covers the output directory, which differs here.
  EXPECT_NE(first["input_hash"], second["input_hash"]);
}

TEST_F(CliTest, WritesOnlyIntoOutputDirectory) {
  if (env_or_skip("SLE_RHO_BIN").empty()) GTEST_SKIP() << "SLE_RHO_BIN not set";
  write("w.json", R"({"command": "weights", "params": {"kappa": 6, "rho": [0.5], "x": [-1]}})");
  ASSERT_EQ(run("weights --config w.json --seed 1 --out o"), 0);
  std::set<std::string> entries;
  for (const auto& e : fs::directory_iterator(dir_)) entries.insert(e.path().filename().string());
  EXPECT_EQ(entries, (std::set<std::string>{"w.json", "o", "stdout.txt", "stderr.txt"}));
}

TEST_F(CliTest, SampleConfigsParse) {
  const std::string samples = env_or_skip("SLE_RHO_SAMPLES");
  if (samples.empty()) GTEST_SKIP() << "SLE_RHO_SAMPLES not set";
  int n = 0;
  for (const auto& e : fs::directory_iterator(samples)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(parse_config(read_file(e.path()))) << e.path();
    ++n;
  }
  EXPECT_GE(n, 7);
}
