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

// Records that flow between pipeline stages. Field names match the JSONL
// keys documented in docs/schemas.md.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vgdpo {

struct CandidateRecord {
  std::string problem_id;
  int candidate_index = 0;  // defaults to the ordinal within problem_id
  std::string question;
  std::vector<std::string> reference_steps;
  std::string reference_answer;
  std::optional<std::vector<std::string>> candidate_steps;
  std::optional<std::string> candidate_text;
  std::optional<std::string> final_answer_raw;
  double confidence = 0.0;
  double perplexity = 1.0;
  std::optional<double> logprob_policy;
  std::optional<double> logprob_ref;

  friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

enum class Dimension { sem, structure, order, logic, sym, ans };

inline constexpr std::size_t kNumDimensions = 6;
inline constexpr std::array<std::string_view, kNumDimensions> kDimensionNames{
    "sem", "struct", "order", "logic", "sym", "ans"};

std::string_view to_string(Dimension d);
Dimension dimension_from_string(std::string_view s);

enum class Channel { fast_only, fine };

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view s);

struct ErrorProfile {
  // Indexed by Dimension.
  std::array<double, kNumDimensions> s{};
  double wrongness = 0.0;
  double absurdity = 0.0;
  double w_raw = 0.0;
  Dimension primary_error = Dimension::sem;
  Channel channel = Channel::fine;

  // Fast-channel statistics kept for mining.
  double mean_best_ref_sim = 0.0;    // mean over predicted steps of max ref similarity
  double ref_uncovered = 0.0;        // fraction of ref steps with no pred step >= threshold
  double pred_redundant = 0.0;       // fraction of pred steps with no ref step >= threshold

  std::vector<std::string> diagnostics;

  double& operator[](Dimension d) { return s[static_cast<std::size_t>(d)]; }
  double operator[](Dimension d) const { return s[static_cast<std::size_t>(d)]; }

  friend bool operator==(const ErrorProfile&, const ErrorProfile&) = default;
};

/// One verified candidate: a profile plus what mining needs from the
/// candidate so the reports file is self-contained.
struct Report {
  std::string problem_id;
  int candidate_index = 0;
  double confidence = 0.0;
  double perplexity = 1.0;
  std::string reference_answer;
  std::optional<std::string> pred_answer;
  std::vector<std::string> pred_steps;
  ErrorProfile profile;

  friend bool operator==(const Report&, const Report&) = default;
};

/// A (chosen, rejected) pair plus the toy-policy payload dpo-sim trains on.
struct PreferencePair {
  std::string problem_id;
  int chosen_index = 0;
  int rejected_index = 0;
  double w_raw = 1.0;
  std::vector<std::string> tags;
  int context = 0;
  std::vector<int> chosen_tokens;
  std::vector<int> rejected_tokens;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

struct PredictionRecord {
  std::string problem_id;
  std::string prediction_text;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct GoldRecord {
  std::string problem_id;
  std::string answer;

  friend bool operator==(const GoldRecord&, const GoldRecord&) = default;
};

struct EvalRecord {
  std::string problem_id;
  std::string prediction_text;
  std::string gold_answer;
  // Normalized extracted prediction: raw, canonical, numeric (as n/d text).
  std::optional<std::string> extracted_raw;
  std::optional<std::string> extracted_canonical;
  std::optional<std::string> extracted_numeric;
  bool correct = false;
  std::vector<std::string> diagnostics;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct TraceRecord {
  int step = 0;
  double loss = 0.0;             // weighted batch loss
  double unweighted_loss = 0.0;  // mean per-pair loss
  std::vector<double> margins;
  std::vector<double> weights;
  double elapsed_ms = 0.0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

}  // namespace vgdpo
