// Copyright 2026 The vgdpo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Runs the installed-style binary as a subprocess and checks exit codes and
// what it prints.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace {

const std::filesystem::path kData = VGDPO_TEST_DATA_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("vgdpo-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Result run(const std::string& args) const {
    std::string cmd = std::string("'") + VGDPO_CLI_PATH + "' " + args + " >'" + path("stdout") +
                      "' 2>'" + path("stderr") + "'";
    int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(path("stdout"));
    r.err = slurp(path("stderr"));
    return r;
  }

  std::size_t lines(const std::string& name) const {
    std::ifstream in(path(name));
    std::size_t n = 0;
    for (std::string l; std::getline(in, l);) n += !l.empty();
    return n;
  }

  std::filesystem::path dir_;
};

TEST_F(Cli, VerifyFiveRecords) {
  auto r = run("verify --in '" + (kData / "verifier_fixtures.jsonl").string() + "' --out " +
               path("reports.jsonl"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines("reports.jsonl"), 5u);
  EXPECT_TRUE(std::filesystem::exists(path("reports.jsonl.summary.json")));
  EXPECT_FALSE(std::filesystem::exists(path("reports.jsonl.errors.jsonl")));
}

TEST_F(Cli, MissingInputExitsOneAndNamesThePath) {
  auto r = run("verify --in " + path("nope.jsonl") + " --out " + path("out.jsonl"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(path("nope.jsonl")), std::string::npos) << r.err;
}

TEST_F(Cli, OneMalformedRecordExitsTwo) {
  {
    std::ifstream in(kData / "verifier_fixtures.jsonl");
    std::ofstream out(path("in.jsonl"));
    int n = 0;
    for (std::string line; std::getline(in, line); ++n) {
      out << (n == 3 ? R"({"problem_id": "x", "confidence": 2})" : line) << "\n";
    }
  }
  auto r = run("verify --in " + path("in.jsonl") + " --out " + path("out.jsonl"));
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_EQ(lines("out.jsonl"), 4u);
  EXPECT_EQ(lines("out.jsonl.errors.jsonl"), 1u);
  EXPECT_NE(slurp(path("out.jsonl.errors.jsonl")).find("\"line\":4"), std::string::npos);
}

TEST_F(Cli, HelpDocumentsEveryCommandAndFlag) {
  auto top = run("--help");
  EXPECT_EQ(top.code, 0);
  for (const char* cmd : {"verify", "mine", "dpo-sim", "eval", "bench"}) {
    EXPECT_NE(top.out.find(cmd), std::string::npos) << cmd;
  }
  auto verify = run("verify --help");
  for (const char* flag : {"--in", "--out", "--config", "--fine-fraction", "--workers",
                           "--deterministic", "--set"}) {
    EXPECT_NE(verify.out.find(flag), std::string::npos) << flag;
  }
  auto bench = run("bench --help");
  for (const char* flag : {"--repeat", "--simulate-latency-ms", "--no-cache"}) {
    EXPECT_NE(bench.out.find(flag), std::string::npos) << flag;
  }
}

TEST_F(Cli, UsageAndConfigErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("verify --in x").code, 1);
  auto r = run("verify --in '" + (kData / "verifier_fixtures.jsonl").string() + "' --out " +
               path("o") + " --set w_min=3");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("w_min exceeds w_max"), std::string::npos) << r.err;
}

TEST_F(Cli, EvalPrintsAccuracy) {
  auto r = run("eval --pred '" + (kData / "eval_three_of_four_predictions.jsonl").string() +
               "' --gold '" + (kData / "eval_three_of_four_gold.jsonl").string() + "' --out " +
               path("eval.jsonl"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"accuracy\": 0.75"), std::string::npos) << r.out;
  EXPECT_EQ(lines("eval.jsonl"), 4u);
}

TEST_F(Cli, VerifyMineDpoChain) {
  ASSERT_EQ(run("verify --in '" + (kData / "verifier_fixtures.jsonl").string() + "' --out " +
                path("r"))
                .code,
            0);
  ASSERT_EQ(run("mine --in " + path("r") + " --out " + path("p")).code, 0);
  auto d = run("dpo-sim --in '" + (kData / "toy_pairs.jsonl").string() + "' --out " + path("t") +
               " --steps 3");
  EXPECT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(lines("t"), 4u);
}

}  // namespace
