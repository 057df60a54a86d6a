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


#include <cmath>
#include <cstring>
#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "vgdpo/semantic_backend.hpp"
#include "vgdpo/sim_server.hpp"

namespace vgdpo {
namespace {

using testing::TempDir;

std::unique_ptr<SemanticBackend> default_backend(bool cache = true) {
  BackendConfig cfg;
  cfg.cache = cache;
  return SemanticBackend::from_config(cfg);
}

double l2(const EmbeddingVector& v) {
  double s = 0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s);
}

TEST(HashedEmbedding, DeterministicBitForBit) {
  auto a = hashed_embedding("x");
  auto b = hashed_embedding("x");
  ASSERT_EQ(a.values.size(), 256u);
  EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), 256 * sizeof(double)), 0);
}

TEST(HashedEmbedding, EmptyTextIsTheZeroVector) {
  auto v = hashed_embedding("");
  EXPECT_TRUE(v.is_zero());
  EXPECT_EQ(l2(v), 0.0);
  EXPECT_TRUE(hashed_embedding(" ,.;! ").is_zero());
}

TEST(HashedEmbedding, NonZeroVectorsAreUnitLength) {
  for (const char* t : {"a", "The perimeter is P = 2*(l+w).", "x x x y", "Tom has 5 apples"}) {
    EXPECT_NEAR(l2(hashed_embedding(t)), 1.0, 1e-9) << t;
  }
}

TEST(HashedEmbedding, KnownBuckets) {
  // FNV-1a("apple") % 256 = 191 with bit 8 set; FNV-1a("banana") % 256 = 144
  // with bit 8 clear (computed with an independent implementation).
  auto v = hashed_embedding("Apple banana");
  EXPECT_NEAR(v.values[191], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v.values[144], -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Cosine, DisjointBucketsGiveZero) {
  // Buckets {191, 144} and {248, 112}: no collisions.
  EXPECT_EQ(cosine(hashed_embedding("apple banana"), hashed_embedding("cherry grape")), 0.0);
}

TEST(Cosine, SelfSimilarityAndZeroConvention) {
  auto v = hashed_embedding("the sum is even");
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-9);
  EXPECT_EQ(cosine(v, hashed_embedding("")), 0.0);
  EXPECT_THROW(cosine(v, hashed_embedding("x", 128)), Error);
}

TEST(Cosine, MatrixShapeAndRange) {
  std::vector<EmbeddingVector> a{hashed_embedding("one two"), hashed_embedding("three")};
  std::vector<EmbeddingVector> b{hashed_embedding("two"), hashed_embedding(""),
                                 hashed_embedding("one two three")};
  auto m = cosine_sim_matrix(a, b);
  ASSERT_EQ(m.size(), 2u);
  for (const auto& row : m) {
    ASSERT_EQ(row.size(), 3u);
    for (double x : row) {
      EXPECT_GE(x, -1.0);
      EXPECT_LE(x, 1.0 + 1e-9);
    }
  }
  EXPECT_EQ(m[0][1], 0.0);
}

TEST(RuleNli, SpecExamples) {
  EXPECT_EQ(rule_nli("x = 5", "x = 7").label, NliLabel::contradict);
  EXPECT_EQ(rule_nli("the sum is even", "the sum is not even").label, NliLabel::contradict);
  EXPECT_EQ(rule_nli("a and b", "a").label, NliLabel::entail);
  auto neutral = rule_nli("the cat sat", "dogs bark");
  EXPECT_EQ(neutral.label, NliLabel::neutral);
  EXPECT_EQ(neutral.score, 0.5);
}

TEST(RuleNli, BindingForms) {
  EXPECT_EQ(rule_nli("the total is 12", "so the total is 15").rule_tag, "binding_conflict");
  EXPECT_EQ(rule_nli("speed: 40", "speed: 45").label, NliLabel::contradict);
  EXPECT_EQ(rule_nli("x = 1,000", "x = 1000").label, NliLabel::neutral);
  EXPECT_EQ(rule_nli("x = 1/2", "x = 0.5").label, NliLabel::neutral);
  EXPECT_EQ(rule_nli("x = \\frac{1}{2}", "x = 0.6").label, NliLabel::contradict);
  EXPECT_EQ(rule_nli("X = 5", "x = 6").label, NliLabel::contradict);  // case-folded
  // Different identifiers never conflict.
  EXPECT_EQ(rule_nli("x = 5", "y = 7").label, NliLabel::neutral);
}

TEST(RuleNli, EquationRightHandSidesAreNotBindings) {
  // "w = 3 + 4" binds nothing: the number continues into an expression.
  EXPECT_NE(rule_nli("w = 4", "l + w = 3 + 4 = 7").label, NliLabel::contradict);
  EXPECT_NE(rule_nli("x = 2", "x = 2x - 2").label, NliLabel::contradict);
  EXPECT_NE(rule_nli("a = 3", "2a = 6").label, NliLabel::contradict);
  EXPECT_NE(rule_nli("x = 5", "\\frac = 6").label, NliLabel::contradict);
  EXPECT_NE(rule_nli("x = 5", "x = 6cm").label, NliLabel::contradict);
}

TEST(RuleNli, NegationRequiresOtherwiseEqualText) {
  EXPECT_EQ(rule_nli("it doesn't work.", "It does work").label, NliLabel::contradict);
  EXPECT_NE(rule_nli("the sum is even", "the sum is not odd").label, NliLabel::contradict);
  EXPECT_NE(rule_nli("it is not not true", "it is true").label, NliLabel::contradict);
}

TEST(SemanticBackend, FreshCacheIsEmpty) {
  auto b = default_backend();
  auto s = b->cache_stats();
  EXPECT_EQ(s.hits, 0u);
  EXPECT_EQ(s.misses, 0u);
  EXPECT_EQ(s.entries, 0u);
}

TEST(SemanticBackend, SecondLookupHits) {
  auto b = default_backend();
  std::vector<std::string> texts{"same text"};
  auto first = b->embed_batch(texts);
  auto second = b->embed_batch(texts);
  EXPECT_EQ(first, second);
  EXPECT_GE(b->cache_stats().hits, 1u);
  EXPECT_EQ(b->cache_stats().misses, 1u);
  b->judge("x = 1", "x = 2");
  b->judge("x = 1", "x = 2");
  EXPECT_EQ(b->cache_stats().misses, 2u);
  EXPECT_EQ(b->cache_stats().entries, 2u);
}

TEST(SemanticBackend, DuplicatesInsideOneBatchAreComputedOnce) {
  auto b = default_backend();
  std::vector<std::string> texts{"a b", "c", "a b", "a b"};
  auto out = b->embed_batch(texts);
  EXPECT_EQ(out[0], out[2]);
  EXPECT_EQ(b->cache_stats().misses, 2u);
  EXPECT_EQ(b->cache_stats().hits, 2u);
}

TEST(SemanticBackend, CacheIsTransparent) {
  auto cached = default_backend(true);
  auto plain = default_backend(false);
  std::vector<std::string> texts{"Here l = 3 and w = 4.", "", "So P = 14.", "Here l = 3 and w = 4."};
  cached->embed_batch(texts);  // warm
  EXPECT_EQ(cached->embed_batch(texts), plain->embed_batch(texts));
  std::vector<NliPair> pairs{{"x = 5", "x = 7"}, {"a and b", "a"}, {"p", "q"}};
  cached->judge_batch(pairs);
  EXPECT_EQ(cached->judge_batch(pairs), plain->judge_batch(pairs));
  EXPECT_EQ(plain->cache_stats().entries, 0u);
}

TEST(SemanticBackend, ConcurrentLookupsAgree) {
  auto b = default_backend();
  std::vector<std::string> texts;
  for (int i = 0; i < 64; ++i) texts.push_back("text number " + std::to_string(i % 16));
  std::vector<std::vector<EmbeddingVector>> results(8);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] { results[t] = b->embed_batch(texts); });
  }
  for (auto& th : threads) th.join();
  for (int t = 1; t < 8; ++t) EXPECT_EQ(results[t], results[0]);
  EXPECT_EQ(b->cache_stats().entries, 16u);
  EXPECT_EQ(b->cache_stats().hits + b->cache_stats().misses, 8u * 64u);
}

TEST(SemanticCache, PersistsAcrossBackends) {
  TempDir dir;
  BackendConfig cfg;
  cfg.cache_path = (dir / "cache.jsonl").string();
  std::vector<std::string> texts{"alpha beta", "gamma"};
  std::vector<EmbeddingVector> before;
  {
    auto b = SemanticBackend::from_config(cfg);
    before = b->embed_batch(texts);
    b->judge("x = 1", "x = 2");
    b->persist();
  }
  auto b = SemanticBackend::from_config(cfg);
  EXPECT_EQ(b->cache_stats().entries, 3u);
  EXPECT_EQ(b->embed_batch(texts), before);
  EXPECT_EQ(b->judge("x = 1", "x = 2").label, NliLabel::contradict);
  EXPECT_EQ(b->cache_stats().misses, 0u);
}

TEST(SemanticCache, CorruptFileIsReported) {
  TempDir dir;
  {
    std::ofstream out(dir / "cache.jsonl");
    out << "{\"k\":\"zz\",\"e\":[1]}\n";
  }
  BackendConfig cfg;
  cfg.cache_path = (dir / "cache.jsonl").string();
  EXPECT_THROW(SemanticBackend::from_config(cfg), Error);
}

class RemoteBackendTest : public ::testing::Test {
 protected:
  BackendConfig remote_config() const {
    BackendConfig cfg;
    cfg.embedder = "remote";
    cfg.nli = "remote";
    cfg.endpoint = server.endpoint();
    cfg.timeout_ms = 2000;
    cfg.cache = false;
    return cfg;
  }
  SimulatedRemote server{0};
};

TEST_F(RemoteBackendTest, MatchesTheLocalBackends) {
  auto remote = SemanticBackend::from_config(remote_config());
  auto local = default_backend(false);
  std::vector<std::string> texts{"So P = 2*7 = 14.", "", "apple banana"};
  auto r = remote->embed_batch(texts);
  auto l = local->embed_batch(texts);
  ASSERT_EQ(r.size(), l.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    ASSERT_EQ(r[i].values.size(), 256u);
    for (std::size_t k = 0; k < 256; ++k) EXPECT_NEAR(r[i].values[k], l[i].values[k], 1e-15);
  }
  EXPECT_TRUE(r[1].is_zero());
  std::vector<NliPair> pairs{{"x = 5", "x = 7"}, {"a and b", "a"}, {"p", "q"}};
  EXPECT_EQ(remote->judge_batch(pairs), local->judge_batch(pairs));
  EXPECT_EQ(server.requests(), 2u);
}

TEST_F(RemoteBackendTest, RetriesTwiceThenNamesTheEndpoint) {
  auto remote = SemanticBackend::from_config(remote_config());
  server.set_failing(true);
  std::vector<std::string> texts{"x"};
  try {
    remote->embed_batch(texts);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::backend);
    EXPECT_NE(std::string(e.what()).find(server.endpoint()), std::string::npos) << e.what();
  }
  EXPECT_EQ(server.requests(), 3u);
}

TEST_F(RemoteBackendTest, DimensionMismatchIsAnError) {
  auto remote = SemanticBackend::from_config(remote_config());
  server.set_reply_dim(128);
  std::vector<std::string> texts{"x"};
  try {
    remote->embed_batch(texts);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("dimension"), std::string::npos) << e.what();
  }
}

TEST_F(RemoteBackendTest, CacheAvoidsTheSecondRoundTrip) {
  auto cfg = remote_config();
  cfg.cache = true;
  auto remote = SemanticBackend::from_config(cfg);
  std::vector<std::string> texts{"a", "b"};
  remote->embed_batch(texts);
  remote->embed_batch(texts);
  EXPECT_EQ(server.requests(), 1u);
}

TEST(RemoteBackend, UnreachableEndpointFails) {
  std::string endpoint;
  {
    SimulatedRemote gone(0);
    endpoint = gone.endpoint();
  }
  BackendConfig cfg;
  cfg.embedder = "remote";
  cfg.endpoint = endpoint;
  cfg.timeout_ms = 300;
  auto b = SemanticBackend::from_config(cfg);
  std::vector<std::string> texts{"x"};
  EXPECT_THROW(b->embed_batch(texts), Error);
}

}  // namespace
}  // namespace vgdpo
