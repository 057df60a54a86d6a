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

#include "vgdpo/semantic_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_set>

#include <json.hpp>

#include "vgdpo/common.hpp"
#include "vgdpo/solution_parser.hpp"

namespace vgdpo {

std::string_view to_string(NliLabel label) {
  switch (label) {
    case NliLabel::entail: return "entail";
    case NliLabel::neutral: return "neutral";
    case NliLabel::contradict: return "contradict";
  }
  return "neutral";
}

NliLabel nli_label_from_string(std::string_view s) {
  if (s == "entail" || s == "entailment") return NliLabel::entail;
  if (s == "neutral") return NliLabel::neutral;
  if (s == "contradict" || s == "contradiction") return NliLabel::contradict;
  throw Error(ErrorKind::parse, "unknown NLI label '" + std::string(s) + "'");
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

EmbeddingVector hashed_embedding(std::string_view text, std::size_t dim) {
  EmbeddingVector v;
  v.values.assign(dim, 0.0);
  for (const auto& tok : tokenize(text)) {
    std::uint64_t h = fnv1a64(tok);
    v.values[h % dim] += ((h >> 8) & 1U) ? 1.0 : -1.0;
  }
  double sq = 0.0;
  for (double x : v.values) sq += x * x;
  if (sq > 0.0) {
    double norm = std::sqrt(sq);
    for (double& x : v.values) x /= norm;
    v.norm = 1.0;
  }
  return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.values.size() != b.values.size()) {
    throw Error(ErrorKind::invalid_argument,
                "embedding dimension mismatch: " + std::to_string(a.values.size()) +
                    " vs " + std::to_string(b.values.size()));
  }
  if (a.is_zero() || b.is_zero()) return 0.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return dot;
}

SimilarityMatrix cosine_sim_matrix(std::span<const EmbeddingVector> a,
                                   std::span<const EmbeddingVector> b) {
  SimilarityMatrix m(a.size(), std::vector<double>(b.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) m[i][j] = cosine(a[i], b[j]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Rule NLI

namespace {

std::string nli_normalize(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  while (!out.empty() && std::string_view(".!?;,").find(out.back()) != std::string_view::npos) {
    out.pop_back();
  }
  return out;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of a NUM token at the start of `s`, or 0.
std::size_t number_length(std::string_view s) {
  std::size_t i = 0;
  if (s.starts_with("\\frac{")) {
    auto end = s.find('}', 6);
    if (end == std::string_view::npos || end + 1 >= s.size() || s[end + 1] != '{') return 0;
    auto end2 = s.find('}', end + 2);
    return end2 == std::string_view::npos ? 0 : end2 + 1;
  }
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  std::size_t digits = i;
  while (i < s.size() && (is_digit(s[i]) || (s[i] == ',' && i + 1 < s.size() && is_digit(s[i + 1]) && i > digits))) ++i;
  if (i == digits) return 0;
  if (i + 1 < s.size() && (s[i] == '.' || s[i] == '/') && is_digit(s[i + 1])) {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i;
  }
  return i;
}

std::multimap<std::string, Rational> bindings(std::string_view s) {
  std::multimap<std::string, Rational> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!ident_start(s[i]) || (i > 0 && (ident_char(s[i - 1]) || s[i - 1] == '\\'))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < s.size() && ident_char(s[i])) ++i;
    std::string ident(s.substr(start, i - start));

    std::size_t j = i;
    while (j < s.size() && s[j] == ' ') ++j;
    if (j < s.size() && (s[j] == '=' || s[j] == ':')) {
      ++j;
    } else if (s.substr(j).starts_with("is ")) {
      j += 2;
    } else {
      continue;
    }
    while (j < s.size() && s[j] == ' ') ++j;

    std::size_t len = number_length(s.substr(j));
    if (len == 0) continue;
    std::string num(s.substr(j, len));
    std::size_t k = j + len;
    while (k < s.size() && s[k] == ' ') ++k;
    if (k < s.size() &&
        (std::string_view("+-*/^(=").find(s[k]) != std::string_view::npos ||
         (ident_char(s[k]) && k == j + len))) {
      continue;
    }
    std::erase(num, ',');
    if (auto v = parse_number(num)) out.emplace(ident, *v);
  }
  return out;
}

bool bindings_conflict(std::string_view premise, std::string_view hypothesis) {
  auto p = bindings(premise);
  auto h = bindings(hypothesis);
  for (const auto& [ident, value] : h) {
    auto [lo, hi] = p.equal_range(ident);
    if (lo == hi) continue;
    bool agrees = false;
    for (auto it = lo; it != hi; ++it) agrees = agrees || it->second == value;
    if (!agrees) return true;
  }
  return false;
}

// Words with "not" removed and "n't" stripped, plus the negation count.
std::pair<std::vector<std::string>, int> strip_negation(std::string_view s) {
  std::vector<std::string> words;
  int negations = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    auto sp = s.find(' ', i);
    std::string w(s.substr(i, sp == std::string_view::npos ? std::string_view::npos : sp - i));
    i = sp == std::string_view::npos ? s.size() : sp + 1;
    if (w == "not") {
      ++negations;
      continue;
    }
    if (w.size() > 3 && w.ends_with("n't")) {
      ++negations;
      w.resize(w.size() - 3);
    }
    words.push_back(std::move(w));
  }
  return {std::move(words), negations};
}

}  // namespace

NliVerdict rule_nli(std::string_view premise, std::string_view hypothesis) {
  std::string p = nli_normalize(premise);
  std::string h = nli_normalize(hypothesis);

  if (bindings_conflict(p, h)) return {NliLabel::contradict, 1.0, "binding_conflict"};

  auto [pw, pn] = strip_negation(p);
  auto [hw, hn] = strip_negation(h);
  if (pw == hw && std::abs(pn - hn) == 1) return {NliLabel::contradict, 1.0, "negation"};

  if (p.find(h) != std::string::npos) return {NliLabel::entail, 1.0, "substring"};
  return {NliLabel::neutral, 0.5, "none"};
}

std::vector<EmbeddingVector> HashedEmbedder::embed(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hashed_embedding(t, dim_));
  return out;
}

std::vector<NliVerdict> RuleNliJudge::judge(std::span<const NliPair> pairs) {
  std::vector<NliVerdict> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(rule_nli(p.premise, p.hypothesis));
  return out;
}

// ---------------------------------------------------------------------------
// Cache

std::optional<EmbeddingVector> SemanticCache::find_embedding(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = embeddings_.find(key);
  if (it == embeddings_.end()) return std::nullopt;
  return it->second;
}

EmbeddingVector SemanticCache::insert_embedding(const std::string& key, EmbeddingVector v) {
  std::lock_guard lock(mu_);
  return embeddings_.try_emplace(key, std::move(v)).first->second;
}

std::optional<NliVerdict> SemanticCache::find_verdict(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = verdicts_.find(key);
  if (it == verdicts_.end()) return std::nullopt;
  return it->second;
}

NliVerdict SemanticCache::insert_verdict(const std::string& key, NliVerdict v) {
  std::lock_guard lock(mu_);
  return verdicts_.try_emplace(key, std::move(v)).first->second;
}

std::size_t SemanticCache::size() const {
  std::lock_guard lock(mu_);
  return embeddings_.size() + verdicts_.size();
}

namespace {

std::string hex_encode(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out += kHex[c >> 4];
    out += kHex[c & 15];
  }
  return out;
}

std::string hex_decode(std::string_view hex) {
  auto val = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw Error(ErrorKind::parse, "bad hex digit in cache file");
  };
  if (hex.size() % 2 != 0) throw Error(ErrorKind::parse, "odd-length hex key in cache file");
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out += static_cast<char>(val(hex[i]) * 16 + val(hex[i + 1]));
  }
  return out;
}

}  // namespace

void SemanticCache::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string key = hex_decode(j.at("k").get<std::string>());
      if (j.contains("e")) {
        EmbeddingVector v;
        v.values = j.at("e").get<std::vector<double>>();
        v.norm = j.at("norm").get<double>();
        insert_embedding(key, std::move(v));
      } else {
        const auto& n = j.at("n");
        insert_verdict(key, NliVerdict{nli_label_from_string(n.at("label").get<std::string>()),
                                       n.at("score").get<double>(),
                                       n.value("tag", std::string())});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::parse, "cache file '" + path.string() + "' line " +
                                        std::to_string(line_no) + ": " + e.what());
    }
  }
}

void SemanticCache::save(const std::filesystem::path& path) const {
  std::map<std::string, std::string> lines;  // sorted for stable output
  {
    std::lock_guard lock(mu_);
    for (const auto& [k, v] : embeddings_) {
      nlohmann::json j{{"k", hex_encode(k)}, {"e", v.values}, {"norm", v.norm}};
      lines.emplace(k, j.dump());
    }
    for (const auto& [k, v] : verdicts_) {
      nlohmann::json j{{"k", hex_encode(k)},
                       {"n", {{"label", to_string(v.label)}, {"score", v.score}, {"tag", v.rule_tag}}}};
      lines.emplace(k, j.dump());
    }
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write cache file '" + tmp.string() + "'");
    for (const auto& [_, line] : lines) out << line << '\n';
    if (!out) throw Error(ErrorKind::io, "write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Backend

SemanticBackend::SemanticBackend(std::unique_ptr<Embedder> embedder,
                                 std::unique_ptr<NliJudge> judge, bool cache_enabled,
                                 std::filesystem::path cache_path)
    : embedder_(std::move(embedder)),
      judge_(std::move(judge)),
      cache_enabled_(cache_enabled),
      cache_path_(std::move(cache_path)) {
  if (cache_enabled_ && !cache_path_.empty()) cache_.load(cache_path_);
}

std::unique_ptr<SemanticBackend> SemanticBackend::from_config(const BackendConfig& cfg) {
  auto dim = static_cast<std::size_t>(cfg.embedding_dim);
  std::unique_ptr<Embedder> embedder;
  if (cfg.embedder == "remote") {
    embedder = std::make_unique<RemoteEmbedder>(cfg.endpoint, cfg.timeout_ms, dim);
  } else {
    embedder = std::make_unique<HashedEmbedder>(dim);
  }
  std::unique_ptr<NliJudge> judge;
  if (cfg.nli == "remote") {
    judge = std::make_unique<RemoteNliJudge>(cfg.endpoint, cfg.timeout_ms);
  } else {
    judge = std::make_unique<RuleNliJudge>();
  }
  return std::make_unique<SemanticBackend>(std::move(embedder), std::move(judge), cfg.cache,
                                           cfg.cache_path);
}

std::vector<EmbeddingVector> SemanticBackend::embed_batch(std::span<const std::string> texts) {
  if (!cache_enabled_) {
    misses_ += texts.size();
    return embedder_->embed(texts);
  }

  const std::string prefix = embedder_->id() + '\0';
  std::vector<std::optional<EmbeddingVector>> found(texts.size());
  std::vector<std::string> missing;
  std::unordered_map<std::string, std::size_t> missing_index;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if ((found[i] = cache_.find_embedding(prefix + texts[i]))) {
      ++hits_;
    } else if (missing_index.contains(texts[i])) {
      ++hits_;
    } else {
      ++misses_;
      missing_index.emplace(texts[i], missing.size());
      missing.push_back(texts[i]);
    }
  }

  std::vector<EmbeddingVector> computed;
  if (!missing.empty()) {
    computed = embedder_->embed(missing);
    if (computed.size() != missing.size()) {
      throw Error(ErrorKind::backend, "embedder returned " + std::to_string(computed.size()) +
                                          " vectors for " + std::to_string(missing.size()) +
                                          " texts");
    }
    for (std::size_t k = 0; k < missing.size(); ++k) {
      computed[k] = cache_.insert_embedding(prefix + missing[k], std::move(computed[k]));
    }
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back(found[i] ? std::move(*found[i]) : computed[missing_index.at(texts[i])]);
  }
  return out;
}

std::vector<NliVerdict> SemanticBackend::judge_batch(std::span<const NliPair> pairs) {
  if (!cache_enabled_) {
    misses_ += pairs.size();
    return judge_->judge(pairs);
  }

  const std::string prefix = judge_->id() + '\0';
  auto key_of = [&prefix](const NliPair& p) {
    std::string key = prefix;
    key += p.premise;
    key += '\0';
    key += p.hypothesis;
    return key;
  };

  std::vector<std::optional<NliVerdict>> found(pairs.size());
  std::vector<NliPair> missing;
  std::unordered_map<std::string, std::size_t> missing_index;
  std::vector<std::string> keys;
  keys.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    keys.push_back(key_of(pairs[i]));
    if ((found[i] = cache_.find_verdict(keys[i]))) {
      ++hits_;
    } else if (missing_index.contains(keys[i])) {
      ++hits_;
    } else {
      ++misses_;
      missing_index.emplace(keys[i], missing.size());
      missing.push_back(pairs[i]);
    }
  }

  std::vector<NliVerdict> computed;
  if (!missing.empty()) {
    computed = judge_->judge(missing);
    if (computed.size() != missing.size()) {
      throw Error(ErrorKind::backend, "NLI judge returned " + std::to_string(computed.size()) +
                                          " verdicts for " + std::to_string(missing.size()) +
                                          " pairs");
    }
    for (std::size_t k = 0; k < missing.size(); ++k) {
      computed[k] = cache_.insert_verdict(key_of(missing[k]), std::move(computed[k]));
    }
  }

  std::vector<NliVerdict> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.push_back(found[i] ? std::move(*found[i]) : computed[missing_index.at(keys[i])]);
  }
  return out;
}

NliVerdict SemanticBackend::judge(std::string_view premise, std::string_view hypothesis) {
  NliPair pair{std::string(premise), std::string(hypothesis)};
  return judge_batch(std::span<const NliPair>(&pair, 1)).front();
}

CacheStats SemanticBackend::cache_stats() const {
  return {hits_.load(), misses_.load(), cache_enabled_ ? cache_.size() : 0};
}

void SemanticBackend::persist() const {
  if (cache_enabled_ && !cache_path_.empty()) cache_.save(cache_path_);
}

}  // namespace vgdpo
