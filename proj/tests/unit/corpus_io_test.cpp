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


#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "generators.hpp"
#include "vgdpo/config.hpp"
#include "vgdpo/corpus_io.hpp"

namespace vgdpo {
namespace {

using testing::TempDir;

constexpr const char* kGoodLine =
    R"({"problem_id":"p1","question":"q","reference_steps":["a"],"reference_answer":"1",)"
    R"("candidate_text":"a","confidence":0.8,"perplexity":120})";

Report sample_report(int index, double wrongness) {
  Report r;
  r.problem_id = "prob-" + std::to_string(index / 2);
  r.candidate_index = index;
  r.confidence = 0.75;
  r.perplexity = 31.5;
  r.reference_answer = "12";
  r.pred_answer = index % 2 ? std::optional<std::string>("13") : std::nullopt;
  r.pred_steps = {"x = 3", "so 4x = 12"};
  r.profile.s = {0.1, 0.2, 0.0, 1.0 / 3.0, 0.3, 1.0};
  r.profile.wrongness = wrongness;
  r.profile.absurdity = 0.19;
  r.profile.w_raw = 0.33 + wrongness;
  r.profile.primary_error = Dimension::ans;
  r.profile.channel = index % 2 ? Channel::fast_only : Channel::fine;
  r.profile.mean_best_ref_sim = 0.9;
  r.profile.ref_uncovered = 0.5;
  r.profile.diagnostics = {"s_logic: backend down"};
  return r;
}

TEST(LoadCandidates, EmptyFileGivesNothing) {
  TempDir dir;
  write_lines(dir / "c.jsonl", {});
  auto loaded = load_candidates(dir / "c.jsonl");
  EXPECT_TRUE(loaded.records.empty());
  EXPECT_TRUE(loaded.errors.empty());
}

TEST(LoadCandidates, ReadsFieldsOfAWellFormedLine) {
  TempDir dir;
  write_lines(dir / "c.jsonl", {kGoodLine});
  auto loaded = load_candidates(dir / "c.jsonl");
  ASSERT_EQ(loaded.records.size(), 1u);
  ASSERT_TRUE(loaded.errors.empty());
  EXPECT_EQ(loaded.records[0].confidence, 0.8);
  EXPECT_EQ(loaded.records[0].perplexity, 120.0);
  EXPECT_EQ(loaded.records[0].candidate_index, 0);
  EXPECT_FALSE(loaded.records[0].candidate_steps.has_value());
}

TEST(LoadCandidates, ConfidenceOutOfRangeCitesTheLine) {
  TempDir dir;
  std::string bad = kGoodLine;
  bad.replace(bad.find("0.8"), 3, "1.5");
  write_lines(dir / "c.jsonl", {bad});
  auto loaded = load_candidates(dir / "c.jsonl");
  EXPECT_TRUE(loaded.records.empty());
  ASSERT_EQ(loaded.errors.size(), 1u);
  EXPECT_EQ(loaded.errors[0].line, 1u);
  EXPECT_NE(loaded.errors[0].message.find("confidence out of range"), std::string::npos);
  EXPECT_NE(loaded.errors[0].message.find("line 1"), std::string::npos);
}

TEST(LoadCandidates, BadLinesDoNotStopLoading) {
  TempDir dir;
  std::string no_candidate = R"({"problem_id":"p1","question":"q","reference_steps":[],)"
                             R"("reference_answer":"1","confidence":0.5,"perplexity":2})";
  std::string zero_ppl = kGoodLine;
  zero_ppl.replace(zero_ppl.find("120"), 3, "0");
  write_lines(dir / "c.jsonl", {kGoodLine, "{not json", "", no_candidate, zero_ppl, kGoodLine});
  auto loaded = load_candidates(dir / "c.jsonl");
  EXPECT_EQ(loaded.records.size(), 2u);
  ASSERT_EQ(loaded.errors.size(), 3u);
  EXPECT_EQ(loaded.errors[0].line, 2u);
  EXPECT_EQ(loaded.errors[1].line, 4u);
  EXPECT_NE(loaded.errors[1].message.find("candidate_steps"), std::string::npos);
  EXPECT_EQ(loaded.errors[2].line, 5u);
  EXPECT_NE(loaded.errors[2].message.find("perplexity"), std::string::npos);
  // The two good lines share a problem, so they get ordinals 0 and 1.
  EXPECT_EQ(loaded.records[0].candidate_index, 0);
  EXPECT_EQ(loaded.records[1].candidate_index, 1);
}

TEST(LoadCandidates, MissingFileIsAnIoError) {
  try {
    load_candidates("/nonexistent/candidates.jsonl");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
    EXPECT_NE(std::string(e.what()).find("/nonexistent/candidates.jsonl"), std::string::npos);
  }
}

TEST(Reports, WriteThenLoadIsIdentity) {
  TempDir dir;
  std::vector<Report> reports{sample_report(0, 0.42), sample_report(1, 0.1 + 0.2),
                              sample_report(2, 1.0 / 7.0)};
  write_reports(dir / "r.jsonl", reports);
  auto loaded = load_reports(dir / "r.jsonl");
  ASSERT_TRUE(loaded.errors.empty());
  EXPECT_EQ(loaded.records, reports);
  EXPECT_EQ(loaded.records[0].profile.wrongness, 0.42);
}

TEST(Reports, EmptyListWritesAnEmptyFile) {
  TempDir dir;
  write_reports(dir / "r.jsonl", {});
  EXPECT_EQ(read_file(dir / "r.jsonl"), "");
}

TEST(Reports, RealsKeepFifteenSignificantDigits) {
  Report r = sample_report(0, 0.42);
  r.profile.wrongness = 0.1234567890123456;
  auto line = to_line(r);
  EXPECT_NE(line.find("0.1234567890123456"), std::string::npos) << line;
  EXPECT_NEAR(parse_report(line).profile.wrongness, 0.1234567890123456, 1e-12);
}

TEST(Codecs, EveryRecordTypeRoundTrips) {
  auto cands = testing::generate_candidate_pool(12, 3);
  for (const auto& c : cands) EXPECT_EQ(parse_candidate(to_line(c)), c);

  for (const auto& p : testing::canonical_toy_pairs()) EXPECT_EQ(parse_pair(to_line(p)), p);

  PredictionRecord pred{"p7", "so \\boxed{3}"};
  EXPECT_EQ(parse_prediction(to_line(pred)), pred);
  GoldRecord gold{"p7", "3"};
  EXPECT_EQ(parse_gold(to_line(gold)), gold);

  EvalRecord ev;
  ev.problem_id = "p7";
  ev.prediction_text = "so \\boxed{3}";
  ev.gold_answer = "3";
  ev.extracted_raw = "3";
  ev.extracted_canonical = "3";
  ev.extracted_numeric = "3";
  ev.correct = true;
  EXPECT_EQ(parse_eval(to_line(ev)), ev);

  TraceRecord tr{4, 0.61, 0.69, {0.25, -1.0 / 3.0}, {2.0, 0.5}, 0.0};
  EXPECT_EQ(parse_trace(to_line(tr)), tr);
}

TEST(Codecs, ReportRejectsAnUnknownDimensionName) {
  auto line = to_line(sample_report(0, 0.5));
  line.replace(line.find("\"ans\""), 5, "\"answer\"");
  EXPECT_THROW(parse_report(line), Error);
}

TEST(Config, EmptyTextGivesDefaults) {
  RunConfig c = parse_config("");
  EXPECT_EQ(c.lambda, 0.3);
  EXPECT_EQ(c.w_min, 0.5);
  EXPECT_EQ(c.w_max, 2.0);
  EXPECT_EQ(c.beta, 0.1);
  EXPECT_EQ(c.fine_fraction, 1.0);
}

TEST(Config, OverridesAndComments) {
  RunConfig c = parse_config("# weights\nlambda = 0\n\n  w_max=3.5  # headroom\nseed = 9\n");
  EXPECT_EQ(c.lambda, 0.0);
  EXPECT_EQ(c.w_max, 3.5);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, WminAboveWmaxIsRejected) {
  try {
    parse_config("w_min = 3.0\nw_max = 2.0\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("w_min exceeds w_max"), std::string::npos);
  }
}

TEST(Config, UnknownKeyIsAHardError) {
  try {
    parse_config("lamda = 0.2\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("lamda"), std::string::npos);
  }
}

TEST(Config, OutOfRangeValues) {
  EXPECT_THROW(parse_config("lambda = 1.5"), Error);
  EXPECT_THROW(parse_config("beta = 0"), Error);
  EXPECT_THROW(parse_config("wrongness_lo = 0.9"), Error);
  EXPECT_THROW(parse_config("embedder = remote"), Error);  // no endpoint
  EXPECT_THROW(parse_config("lambda = fast"), Error);
}

TEST(Config, EchoedTextReadsBackToTheSameConfig) {
  RunConfig c = parse_config("lambda = 0.25\nextra_unit_tokens = apples,pens\nmin_steps = 3\n");
  std::string text = config_to_text(c);
  EXPECT_EQ(config_to_text(parse_config(text)), text);
  EXPECT_NE(text.find("lambda = 0.25\n"), std::string::npos) << text;
  for (const auto& key : config_keys()) {
    EXPECT_NE(text.find(key + " = "), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace vgdpo
