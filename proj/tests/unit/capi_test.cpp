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


// Exercises the shared library only through its public C header.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "vgdpo/vgdpo.h"

namespace {

const std::filesystem::path kData = VGDPO_TEST_DATA_DIR;

class Scratch {
 public:
  Scratch() {
    dir_ = std::filesystem::temp_directory_path() /
           ("vgdpo-capi-" + std::to_string(::getpid()) + "-" + std::to_string(counter_++));
    std::filesystem::create_directories(dir_);
  }
  ~Scratch() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string operator/(const std::string& name) const { return (dir_ / name).string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path dir_;
};

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

struct Ctx {
  vgdpo_context* ctx = nullptr;
  Ctx() { EXPECT_EQ(vgdpo_context_create(nullptr, &ctx), VGDPO_OK); }
  ~Ctx() { vgdpo_context_destroy(ctx); }
};

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_NE(std::string(vgdpo_version()), "");
  EXPECT_STREQ(vgdpo_status_string(VGDPO_OK), "ok");
  EXPECT_STRNE(vgdpo_status_string(VGDPO_ERR_IO), vgdpo_status_string(VGDPO_ERR_CONFIG));
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(vgdpo_context_create(nullptr, nullptr), VGDPO_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(vgdpo_verify_file(nullptr, "a", "b", nullptr), VGDPO_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(vgdpo_last_error()), "");
  vgdpo_context_destroy(nullptr);
  double out = 0;
  EXPECT_EQ(vgdpo_dpo_loss(0, 0, 0, 0, 0.1, nullptr), VGDPO_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(vgdpo_normalize_weights(nullptr, 3, 0.3, 0.5, 2.0, &out), VGDPO_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ConfigErrors) {
  vgdpo_context* ctx = nullptr;
  EXPECT_EQ(vgdpo_context_create("/nonexistent/vgdpo.conf", &ctx), VGDPO_ERR_IO);
  EXPECT_EQ(ctx, nullptr);
  Ctx c;
  EXPECT_EQ(vgdpo_context_set(c.ctx, "w_min", "3"), VGDPO_ERR_CONFIG);
  EXPECT_NE(std::string(vgdpo_last_error()).find("w_min exceeds w_max"), std::string::npos);
  EXPECT_EQ(vgdpo_context_set(c.ctx, "no_such_key", "1"), VGDPO_ERR_CONFIG);
  EXPECT_EQ(vgdpo_context_set(c.ctx, "beta", "0.25"), VGDPO_OK);

  std::size_t needed = 0;
  EXPECT_EQ(vgdpo_context_config_text(c.ctx, nullptr, 0, &needed), VGDPO_OK);
  std::vector<char> buf(needed);
  EXPECT_EQ(vgdpo_context_config_text(c.ctx, buf.data(), buf.size(), nullptr), VGDPO_OK);
  EXPECT_NE(std::string(buf.data()).find("beta = 0.25"), std::string::npos);
  char tiny[4];
  EXPECT_EQ(vgdpo_context_config_text(c.ctx, tiny, sizeof tiny, nullptr), VGDPO_OK);
  EXPECT_EQ(std::string(tiny).size(), 3u);
}

TEST(CApi, ScalarHelpers) {
  double loss = 0;
  ASSERT_EQ(vgdpo_dpo_loss(-2, -3, -2, -3, 0.1, &loss), VGDPO_OK);
  EXPECT_NEAR(loss, std::log(2.0), 1e-15);
  EXPECT_EQ(vgdpo_dpo_loss(-2, -3, -2, -3, -1.0, &loss), VGDPO_ERR_NUMERIC);

  double raw[] = {2, 1, 1};
  double final_w[3];
  ASSERT_EQ(vgdpo_normalize_weights(raw, 3, 0.3, 0.5, 2.0, final_w), VGDPO_OK);
  EXPECT_NEAR(final_w[0], 1.15, 1e-15);
  EXPECT_NEAR(final_w[1], 0.925, 1e-15);
  EXPECT_EQ(vgdpo_normalize_weights(raw, 0, 0.3, 0.5, 2.0, final_w), VGDPO_ERR_INVALID_ARGUMENT);

  int correct = -1;
  ASSERT_EQ(vgdpo_grade("\\boxed{1,000}", "1000", &correct), VGDPO_OK);
  EXPECT_EQ(correct, 1);
  ASSERT_EQ(vgdpo_grade("no answer", "1000", &correct), VGDPO_OK);
  EXPECT_EQ(correct, 0);
}

TEST(CApi, StagesEndToEnd) {
  Scratch dir;
  Ctx c;
  ASSERT_EQ(vgdpo_context_set(c.ctx, "dpo_steps", "10"), VGDPO_OK);
  vgdpo_verify_summary v{};
  ASSERT_EQ(vgdpo_verify_file(c.ctx, (kData / "verifier_fixtures.jsonl").c_str(),
                              (dir / "reports.jsonl").c_str(), &v),
            VGDPO_OK)
      << vgdpo_last_error();
  EXPECT_EQ(v.records, 5u);
  EXPECT_EQ(v.reports, 5u);
  EXPECT_EQ(count_lines(dir / "reports.jsonl"), 5u);

  vgdpo_cache_stats cs{};
  ASSERT_EQ(vgdpo_context_cache_stats(c.ctx, &cs), VGDPO_OK);
  EXPECT_GT(cs.misses, 0u);
  EXPECT_GT(cs.hits, 0u);  // the fixtures share the reference steps

  vgdpo_mine_summary m{};
  ASSERT_EQ(vgdpo_mine_file(c.ctx, (dir / "reports.jsonl").c_str(), (dir / "pairs.jsonl").c_str(),
                            &m),
            VGDPO_OK);
  EXPECT_EQ(m.reports, 5u);
  EXPECT_EQ(m.positives + m.negatives_pool + m.discarded, 5u);

  vgdpo_eval_summary e{};
  ASSERT_EQ(vgdpo_eval_files(c.ctx, (kData / "eval_three_of_four_predictions.jsonl").c_str(),
                             (kData / "eval_three_of_four_gold.jsonl").c_str(),
                             (dir / "eval.jsonl").c_str(), &e),
            VGDPO_OK);
  EXPECT_EQ(e.accuracy, 0.75);

  EXPECT_EQ(vgdpo_verify_file(c.ctx, (dir / "missing.jsonl").c_str(), (dir / "x").c_str(), nullptr),
            VGDPO_ERR_IO);
  EXPECT_NE(std::string(vgdpo_last_error()).find("missing.jsonl"), std::string::npos);
}

TEST(CApi, PartialStatusOnMalformedLine) {
  Scratch dir;
  {
    std::ifstream in(kData / "verifier_fixtures.jsonl");
    std::ofstream out(dir / "in.jsonl");
    int n = 0;
    for (std::string line; std::getline(in, line); ++n) out << (n == 1 ? "{not json" : line) << "\n";
  }
  Ctx c;
  vgdpo_verify_summary v{};
  EXPECT_EQ(vgdpo_verify_file(c.ctx, (dir / "in.jsonl").c_str(), (dir / "out.jsonl").c_str(), &v),
            VGDPO_PARTIAL);
  EXPECT_EQ(v.reports, 4u);
  EXPECT_EQ(v.failed, 1u);
  EXPECT_TRUE(std::filesystem::exists(dir / "out.jsonl.errors.jsonl"));
}

TEST(CApi, SimServerBacksARemoteContext) {
  vgdpo_sim_server* server = nullptr;
  ASSERT_EQ(vgdpo_sim_server_start(0, &server), VGDPO_OK);
  std::string endpoint = vgdpo_sim_server_endpoint(server);
  EXPECT_EQ(endpoint.rfind("http://127.0.0.1:", 0), 0u);

  Scratch dir;
  Ctx local, remote;
  // A remote backend without an endpoint is rejected, so the endpoint goes first.
  EXPECT_EQ(vgdpo_context_set(remote.ctx, "embedder", "remote"), VGDPO_ERR_CONFIG);
  ASSERT_EQ(vgdpo_context_set(remote.ctx, "endpoint", endpoint.c_str()), VGDPO_OK);
  ASSERT_EQ(vgdpo_context_set(remote.ctx, "embedder", "remote"), VGDPO_OK);
  ASSERT_EQ(vgdpo_context_set(remote.ctx, "nli", "remote"), VGDPO_OK);
  auto in = (kData / "verifier_fixtures.jsonl").string();
  ASSERT_EQ(vgdpo_verify_file(local.ctx, in.c_str(), (dir / "a").c_str(), nullptr), VGDPO_OK);
  ASSERT_EQ(vgdpo_verify_file(remote.ctx, in.c_str(), (dir / "b").c_str(), nullptr), VGDPO_OK)
      << vgdpo_last_error();
  EXPECT_EQ(count_lines(dir / "a"), count_lines(dir / "b"));
  vgdpo_sim_server_stop(server);

  vgdpo_bench_summary b{};
  ASSERT_EQ(vgdpo_bench(local.ctx, in.c_str(), 2, 0, &b), VGDPO_OK);
  EXPECT_EQ(b.samples, 5u);
  EXPECT_EQ(b.warm_misses, 0u);
}

}  // namespace
