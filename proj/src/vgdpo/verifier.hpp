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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vgdpo/alignment.hpp"
#include "vgdpo/config.hpp"
#include "vgdpo/expr.hpp"
#include "vgdpo/records.hpp"
#include "vgdpo/semantic_backend.hpp"

namespace vgdpo {

/// candidate_steps if present, else segment_steps(candidate_text).
std::vector<std::string> candidate_steps(const CandidateRecord& rec);

/// final_answer_raw if present, else the boxed/fallback answer of the
/// candidate text (or of the steps joined by newlines).
std::optional<std::string> predicted_answer(const CandidateRecord& rec,
                                            std::span<const std::string> steps);

struct FastScan {
  std::vector<std::string> pred_steps;
  SimilarityMatrices sims;
  double s_sem = 1.0;
  double mean_best_ref_sim = 0.0;
  std::size_t ref_uncovered = 0;   // ref steps whose best pred similarity < threshold
  std::size_t pred_redundant = 0;  // pred steps whose best ref similarity < threshold
};

/// Embeddings and similarity only: no alignment, NLI or symbolic work.
FastScan fast_scan(const CandidateRecord& rec, const RunConfig& cfg, SemanticBackend& backend);

/// Contradictions among (s[t-1], s[t]) for t >= 1 and (question, s[t]) for
/// every t, divided by the number of pairs; 0 without pairs.
double score_logic(std::string_view question, std::span<const std::string> steps,
                   SemanticBackend& backend);

/// Last maximal run of arithmetic characters (digits, operators, parens,
/// `=`, spaces, `$`, isolated single letters) that contains `=`, with `$`
/// and spaces removed. Empty pieces around `=` are dropped.
std::vector<std::string> extract_equation(std::string_view step);

struct SymComparison {
  std::string pred;
  std::string ref;
  MismatchClass outcome;
};

/// Expression comparisons feeding s_sym: right-aligned equation pieces of
/// every aligned step pair, then the normalized final answers.
std::vector<SymComparison> sym_comparisons(std::span<const std::string> ref_steps,
                                           std::span<const std::string> pred_steps,
                                           const StepAlignment& alignment,
                                           const std::optional<std::string>& pred_answer,
                                           const std::string& ref_answer,
                                           const RunConfig& cfg);

double score_sym(std::span<const SymComparison> comparisons, const SymPenalties& penalties);

/// 0 if the normalized answers match, 1 otherwise (including no answer).
double score_ans(const std::optional<std::string>& pred_answer, const std::string& ref_answer,
                 std::span<const std::string> extra_units = {});

double aggregate_wrongness(std::span<const double, kNumDimensions> s,
                           std::span<const double, kNumDimensions> w);

double aggregate_absurdity(std::span<const double, kNumDimensions> s, const AbsurdityWeights& a);

/// wrongness + (1 - confidence) + perplexity / 100.
double raw_weight(double wrongness, double confidence, double perplexity);

/// Argmax; ties go to the earliest of sem, struct, order, logic, sym, ans.
Dimension primary_error(std::span<const double, kNumDimensions> s);

/// Fills wrongness, absurdity, w_raw and primary_error from s.
void finalize_profile(ErrorProfile& p, const RunConfig& cfg, double confidence, double perplexity);

/// Full analysis. Any failure inside one dimension sets it to 0.5 and adds a
/// diagnostic; backend errors from the embedding step propagate.
ErrorProfile fine_analyze(const CandidateRecord& rec, const RunConfig& cfg,
                          SemanticBackend& backend);

/// Deterministic per-candidate draw against cfg.fine_fraction.
bool fine_sampled(std::string_view problem_id, int candidate_index, std::uint64_t seed,
                  double fine_fraction);

/// fine_analyze when sampled, otherwise a fast-only profile.
Report verify_candidate(const CandidateRecord& rec, const RunConfig& cfg,
                        SemanticBackend& backend);

}  // namespace vgdpo
