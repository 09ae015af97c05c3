#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(NCAG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string tmp(const std::string& name) { return std::string(NCAG_TEST_TMP_DIR) + "/" + name; }

}  // namespace

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("verify --help"), 0);
}

TEST(Cli, PassingSuiteExitsZero) {
  EXPECT_EQ(run("verify --suite dual_form --dims 2,3 --trials 5 --seed 1 --out " +
                tmp("cli_dual.jsonl")),
            0);
  std::ifstream in(tmp("cli_dual.jsonl"));
  EXPECT_TRUE(in.good());
}

TEST(Cli, InvariantFailureExitsOne) {
  EXPECT_EQ(run("verify --suite ag --candidate naive_power --r 3 --dims 2,3 --trials 100 --out " +
                tmp("cli_naive.jsonl")),
            1);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("verify --suite nonsense"), 2);
  EXPECT_EQ(run("verify --suite certificates --r 0.5"), 2);
  EXPECT_EQ(run("verify --suite ag --r 1"), 2);
  EXPECT_EQ(run("verify --suite ag --dims 1"), 2);
  EXPECT_EQ(run("verify --suite ag --ensemble plain"), 2);
  EXPECT_EQ(run("verify --suite ag --trials x"), 2);
  EXPECT_EQ(run("verify"), 2);
  EXPECT_EQ(run("search ag --candidate r_mean"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST(Cli, SearchesExitZero) {
  EXPECT_EQ(run("search ag --candidate naive_power --r 3 --dims 2,3 --trials 2000 --out " +
                tmp("cli_search.jsonl")),
            0);
  EXPECT_EQ(run("search transitivity --dims 2 --trials 0"), 0);
  EXPECT_EQ(run("search transitivity --dims 2 --trials 50 --margin 1e-4"), 0);
}
