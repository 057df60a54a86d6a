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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "vgdpo/semantic_backend.hpp"

namespace vgdpo {

inline constexpr double kDefaultMatchThreshold = 0.5;

struct SimilarityMatrices {
  std::vector<double> to_question;  // one entry per predicted step
  SimilarityMatrix to_reference;    // |ref| x |pred|
};

struct MatchedPair {
  std::size_t ref = 0;
  std::size_t pred = 0;
  double sim = 0.0;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct StepAlignment {
  std::vector<MatchedPair> matched;  // increasing in both indices
  std::vector<std::size_t> missing_ref;
  std::vector<std::size_t> extra_pred;
  double score = 0.0;  // sum of (sim - threshold) over matched pairs

  // One-to-one greedy max-similarity assignment (not monotone), used for
  // the order dimension; sorted by ref index.
  std::vector<MatchedPair> order_pairs;
};

/// Needleman-Wunsch over `sim` (|ref| x |pred|): a match scores
/// sim - threshold, gaps score 0. Traceback prefers match, then a gap in
/// pred (ref step missing), then a gap in ref (extra pred step).
StepAlignment align_steps(const SimilarityMatrix& sim, std::size_t n_ref, std::size_t n_pred,
                          double threshold = kDefaultMatchThreshold);

StepAlignment align_steps(std::span<const EmbeddingVector> ref,
                          std::span<const EmbeddingVector> pred,
                          double threshold = kDefaultMatchThreshold);

/// Pairs with sim >= threshold taken in descending similarity, ties to the
/// smaller ref then pred index, each index used once.
std::vector<MatchedPair> greedy_assignment(const SimilarityMatrix& sim,
                                           double threshold = kDefaultMatchThreshold);

/// (|missing| + |extra|) / (n_ref + n_pred); 0 when both are 0.
double score_struct(const StepAlignment& a, std::size_t n_ref, std::size_t n_pred);

/// 1-based average ranks (ties share the mean of their positions).
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks; 0 when either side is constant.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// (1 - rho) / 2 between positions 0..n-1 and `sequence`; 0 for n < 2.
double score_order(std::span<const double> sequence);

/// Applies the sequence form to a.order_pairs' pred indices.
double score_order(const StepAlignment& a);

/// Mean over pred steps of the best reference similarity; 0 without pred
/// steps or without reference steps.
double mean_best_similarity(const SimilarityMatrix& to_reference, std::size_t n_pred);

/// clip(1 - mean_best_similarity, 0, 1); 1 without pred steps.
double score_sem(const SimilarityMatrix& to_reference, std::size_t n_pred);

}  // namespace vgdpo
