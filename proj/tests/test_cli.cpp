#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spg/spg.hpp"

namespace fs = std::filesystem;
using namespace spg;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(SPG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("spg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(at(name)) << text; }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SolveToyProblem) {
  write("X.csv", "1,0\n0,1\n1,1\n");
  write("y.csv", "1\n2\n3\n");
  write("p.json", R"({"type":"group","gamma":0.5,"groups":[[1,2]]})");
  ASSERT_EQ(run("solve --x " + at("X.csv") + " --y " + at("y.csv") + " --penalty " + at("p.json") +
                " --lambda 0.1 --out " + at("beta.csv") + " --trace " + at("t.jsonl")),
            0);
  const Matrix beta = io::read_csv(at("beta.csv"));
  EXPECT_EQ(beta.rows(), 2);
  EXPECT_EQ(beta.cols(), 1);
  std::ifstream trace(at("t.jsonl"));
  std::string first;
  std::getline(trace, first);
  EXPECT_EQ(io::json::parse(first)["type"], "header");
}

TEST_F(CliTest, PathWritesOneFilePerLambda) {
  Rng rng(4);
  io::write_csv(at("X.csv"), rng.gaussian_matrix(30, 4));
  io::write_csv(at("y.csv"), rng.gaussian_matrix(30, 1));
  std::ostringstream lambdas;
  for (int i = 0; i < 20; ++i) lambdas << (i ? "," : "") << 2.0 * std::pow(0.8, i);
  ASSERT_EQ(run("path --x " + at("X.csv") + " --y " + at("y.csv") + " --lambdas " + lambdas.str() + " --out-dir " +
                at("out")),
            0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(at("out"))) files += e.path().extension() == ".csv";
  EXPECT_EQ(files, 20);
  EXPECT_TRUE(fs::exists(at("out/beta_001.csv")));
  EXPECT_TRUE(fs::exists(at("out/beta_020.csv")));
  EXPECT_EQ(io::read_json(at("out/path.json")).size(), 20u);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  write("spec.json", R"({"num_groups":2,"N":40})");
  ASSERT_EQ(run("simulate overlap --spec " + at("spec.json") + " --seed 3 --out-dir " + at("a")), 0);
  ASSERT_EQ(run("simulate overlap --spec " + at("spec.json") + " --seed 3 --out-dir " + at("b")), 0);
  for (const char* f : {"X.csv", "y.csv", "penalty.json", "instance.json"}) {
    std::ifstream a(at(std::string("a/") + f)), b(at(std::string("b/") + f));
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << f;
  }
  EXPECT_EQ(io::read_csv(at("a/X.csv")).cols(), 190);
}

TEST_F(CliTest, BadInputExitsWithOne) {
  write("X.csv", "1,0\n0,1\n");
  write("y.csv", "1\n2\n3\n");
  write("bad.csv", "1,x\n");
  write("bad.json", R"({"type":"group","groups":[[0]]})");
  const std::string xy = "--x " + at("X.csv") + " --y " + at("y.csv");
  EXPECT_EQ(run("solve " + xy + " --lambda 1 --out " + at("o.csv")), 1);
  EXPECT_EQ(run("solve --x " + at("bad.csv") + " --y " + at("y.csv") + " --lambda 1 --out " + at("o.csv")), 1);
  write("y.csv", "1\n2\n");
  EXPECT_EQ(run("solve " + xy + " --penalty " + at("bad.json") + " --lambda 1 --out " + at("o.csv")), 1);
  EXPECT_EQ(run("solve " + xy + " --lambda -1 --out " + at("o.csv")), 1);
  EXPECT_EQ(run("solve " + xy + " --lambda 1 --mu 1 --epsilon 1 --out " + at("o.csv")), 1);
  EXPECT_EQ(run("path " + xy + " --lambdas 1,2 --out-dir " + at("p")), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_FALSE(fs::exists(at("o.csv")));
}
