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

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vgdpo/config.hpp"

namespace vgdpo {

inline constexpr std::size_t kDefaultEmbeddingDim = 256;

struct EmbeddingVector {
  std::vector<double> values;
  double norm = 0.0;  // 1 unless the vector is all zero

  bool is_zero() const { return norm == 0.0; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

enum class NliLabel { entail, neutral, contradict };

std::string_view to_string(NliLabel label);
NliLabel nli_label_from_string(std::string_view s);

struct NliVerdict {
  NliLabel label = NliLabel::neutral;
  double score = 0.5;
  std::string rule_tag;

  friend bool operator==(const NliVerdict&, const NliVerdict&) = default;
};

struct NliPair {
  std::string premise;
  std::string hypothesis;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t entries = 0;
};

/// Lowercased maximal runs of ASCII alphanumerics.
std::vector<std::string> tokenize(std::string_view text);

/// Signed hashed bag of words: each token's FNV-1a hash picks bucket
/// `h % dim` and sign `+1` if bit 8 is set, else `-1`; the sum is
/// L2-normalized. Empty text gives the zero vector.
EmbeddingVector hashed_embedding(std::string_view text,
                                 std::size_t dim = kDefaultEmbeddingDim);

/// Dot product of pre-normalized vectors; 0 when either is zero.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

using SimilarityMatrix = std::vector<std::vector<double>>;

/// Entry (i, j) is cosine(a[i], b[j]).
SimilarityMatrix cosine_sim_matrix(std::span<const EmbeddingVector> a,
                                   std::span<const EmbeddingVector> b);

/// Deterministic rule judge:
///   1. `ident = NUM`, `ident is NUM`, `ident: NUM` bindings of the same
///      identifier to different values across the pair -> contradict
///   2. the texts differ only by one inserted/removed "not" / "n't"
///      -> contradict
///   3. hypothesis is a substring of premise -> entail
///   otherwise neutral (0.5).
NliVerdict rule_nli(std::string_view premise, std::string_view hypothesis);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

class NliJudge {
 public:
  virtual ~NliJudge() = default;
  virtual std::string id() const = 0;
  virtual std::vector<NliVerdict> judge(std::span<const NliPair> pairs) = 0;
};

class HashedEmbedder final : public Embedder {
 public:
  explicit HashedEmbedder(std::size_t dim = kDefaultEmbeddingDim) : dim_(dim) {}
  std::string id() const override { return "hashed-" + std::to_string(dim_); }
  std::size_t dimension() const override { return dim_; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

 private:
  std::size_t dim_;
};

class RuleNliJudge final : public NliJudge {
 public:
  std::string id() const override { return "rules-v1"; }
  std::vector<NliVerdict> judge(std::span<const NliPair> pairs) override;
};

/// HTTP client for an external embedding/NLI service.
///   POST <endpoint>/embed  {"texts": [...]}            -> {"vectors": [[...], ...]}
///   POST <endpoint>/nli    {"pairs": [[p, h], ...]}    -> {"verdicts": [{"label", "score"}, ...]}
/// A failed request is retried twice before Error(backend) is thrown.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string endpoint, int timeout_ms, std::size_t dim);
  std::string id() const override { return "remote:" + endpoint_; }
  std::size_t dimension() const override { return dim_; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

 private:
  std::string endpoint_;
  int timeout_ms_;
  std::size_t dim_;
};

class RemoteNliJudge final : public NliJudge {
 public:
  RemoteNliJudge(std::string endpoint, int timeout_ms);
  std::string id() const override { return "remote:" + endpoint_; }
  std::vector<NliVerdict> judge(std::span<const NliPair> pairs) override;

 private:
  std::string endpoint_;
  int timeout_ms_;
};

/// Linearizable get-or-insert maps for embeddings and verdicts. Keys are the
/// backend id plus the exact text bytes. A concurrent miss may compute twice;
/// the first inserted value wins and is what every caller sees afterwards.
class SemanticCache {
 public:
  std::optional<EmbeddingVector> find_embedding(const std::string& key) const;
  EmbeddingVector insert_embedding(const std::string& key, EmbeddingVector v);
  std::optional<NliVerdict> find_verdict(const std::string& key) const;
  NliVerdict insert_verdict(const std::string& key, NliVerdict v);

  std::size_t size() const;

  /// Key-value file, one JSON object per line, keys hex-encoded.
  void load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, EmbeddingVector> embeddings_;
  std::unordered_map<std::string, NliVerdict> verdicts_;
};

/// The embedder and judge used by the verifier, with the cache in front.
class SemanticBackend {
 public:
  SemanticBackend(std::unique_ptr<Embedder> embedder, std::unique_ptr<NliJudge> judge,
                  bool cache_enabled, std::filesystem::path cache_path = {});

  static std::unique_ptr<SemanticBackend> from_config(const BackendConfig& cfg);

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts);
  std::vector<NliVerdict> judge_batch(std::span<const NliPair> pairs);
  NliVerdict judge(std::string_view premise, std::string_view hypothesis);

  CacheStats cache_stats() const;
  std::size_t dimension() const { return embedder_->dimension(); }

  /// Writes the cache to its configured path (no-op without one).
  void persist() const;

 private:
  std::unique_ptr<Embedder> embedder_;
  std::unique_ptr<NliJudge> judge_;
  bool cache_enabled_;
  std::filesystem::path cache_path_;
  SemanticCache cache_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

}  // namespace vgdpo
