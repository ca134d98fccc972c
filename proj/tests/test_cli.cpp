#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("yopo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("c.json", R"({"method": "natural", "epochs": 2, "batch_size": 32, "lr": 0.05, "epsilon": 0.2,
      "attack_step": 0.05, "seed": 3,
      "network": {"dims": [4, 8, 2], "activation": "tanh"},
      "data": {"kind": "two_gaussians", "dim": 4, "examples": 128, "test_examples": 64}})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(YOPO_CLI_PATH) + " " + args + " > " + (dir_ / "stdout").string() +
                            " 2> " + (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("train --no-such-flag"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, ConfigErrorsExitOneWithFieldName) {
  EXPECT_EQ(run("train --config " + path("c.json") + " --method pgd --r 2 --n 3 --out-dir " + path("o")), 1);
  EXPECT_NE(read("stderr").find("n"), std::string::npos);
  write("bad.json", R"({"method": "natural", "momentun": 0.5})");
  EXPECT_EQ(run("train --config " + path("bad.json") + " --out-dir " + path("o")), 1);
  EXPECT_NE(read("stderr").find("momentun"), std::string::npos);
}

TEST_F(Cli, TrainTwiceIsByteIdentical) {
  const std::string args = "train --config " + path("c.json") + " --method yopo --m 2 --n 2 --seed 42 --out-dir ";
  ASSERT_EQ(run(args + path("a")), 0) << read("stderr");
  ASSERT_EQ(run(args + path("b")), 0) << read("stderr");
  EXPECT_EQ(read("a/metrics.csv"), read("b/metrics.csv"));
  EXPECT_EQ(read("a/report.json"), read("b/report.json"));
  EXPECT_EQ(read("a/checkpoint.json"), read("b/checkpoint.json"));
  const json report = json::parse(read("a/report.json"));
  EXPECT_TRUE(report.at("audit").at("pass").get<bool>());
  EXPECT_EQ(report.at("resolved_config").at("seed"), 42);
  EXPECT_EQ(read("a/metrics.csv").rfind("# config: ", 0), 0u);
}

TEST_F(Cli, EvalWithoutAttackReportsEqualAccuracies) {
  ASSERT_EQ(run("train --config " + path("c.json") + " --out-dir " + path("t")), 0) << read("stderr");
  ASSERT_EQ(run("eval --checkpoint " + path("t/checkpoint.json") + " --attack none --out " + path("e.json")), 0)
      << read("stderr");
  const json e = json::parse(read("e.json"));
  EXPECT_EQ(e.at("robust_acc"), e.at("clean_acc"));
  ASSERT_EQ(run("attack --checkpoint " + path("t/checkpoint.json") + " --steps 3 --out-dir " + path("t")), 0)
      << read("stderr");
  EXPECT_TRUE(fs::exists(dir_ / "t/perturbations.json"));
  ASSERT_EQ(run("verify-pmp --checkpoint " + path("t/checkpoint.json") + " --samples 20 --out " + path("p.json")),
            0)
      << read("stderr");
  EXPECT_TRUE(json::parse(read("p.json")).contains("per_layer"));
}

TEST_F(Cli, BenchCountsMatchClosedForms) {
  ASSERT_EQ(run("bench --config " + path("c.json") + " --epochs 1 --methods pgd,yopo --grid \"r=5;m=5,n=3\" --out " +
                path("bench.csv")),
            0)
      << read("stderr");
  std::istringstream csv(read("bench.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("# config: ", 0), 0u);
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    ASSERT_GE(f.size(), 10u);
    const long mb = std::stol(f[4]);
    if (f[0] == "pgd") {
      EXPECT_EQ(std::stol(f[6]), 6 * mb);
      EXPECT_EQ(std::stol(f[8]), 0);
    } else {
      EXPECT_EQ(std::stol(f[6]), 6 * mb);
      EXPECT_EQ(std::stol(f[8]), 15 * mb);
    }
    EXPECT_EQ(f[5], f[6]);
    EXPECT_EQ(f[7], f[8]);
    ++rows;
  }
  EXPECT_EQ(rows, 2);
}

TEST_F(Cli, DataGenWritesIdxAndJson) {
  ASSERT_EQ(run("data gen --kind two_moons --dim 2 --examples 20 --format idx --out " + path("moons")), 0)
      << read("stderr");
  EXPECT_TRUE(fs::exists(dir_ / "moons-images.idx"));
  EXPECT_TRUE(fs::exists(dir_ / "moons-labels.idx"));
  write("idx.json", R"({"method": "natural", "epochs": 1, "batch_size": 10,
      "data": {"kind": "idx", "train_images": ")" + path("moons-images.idx") +
                        R"(", "train_labels": ")" + path("moons-labels.idx") + R"("}})");
  EXPECT_EQ(run("train --config " + path("idx.json") + " --out-dir " + path("i")), 0) << read("stderr");
  ASSERT_EQ(run("data gen --examples 10 --format json --out " + path("g")), 0) << read("stderr");
}
