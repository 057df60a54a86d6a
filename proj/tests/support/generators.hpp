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

// Seeded synthetic data for tests, the acceptance suite and the shipped
// fixtures under tests/data.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vgdpo/config.hpp"
#include "vgdpo/records.hpp"

namespace vgdpo::testing {

/// Word problems with templated reference solutions, each followed by
/// candidates of mixed quality: verbatim, reordered, arithmetic slip, wrong
/// formula, contradiction, off-topic, paraphrased. Deterministic in `seed`.
std::vector<CandidateRecord> generate_candidate_pool(std::size_t n, std::uint64_t seed);

enum class PoolKind {
  positive,
  planted_hard,
  low_confidence,
  far_off,
  benign_slip,
  out_of_band,
  degenerate,
};

struct LabeledReport {
  Report report;
  PoolKind kind;
  bool planted() const { return kind == PoolKind::planted_hard; }
};

/// Verified-profile pool for mining: profiles are built from a six-score
/// vector and aggregated with `cfg`, so every invariant holds. Planted hard
/// negatives sit clear of the default thresholds; decoys each break one
/// criterion.
std::vector<LabeledReport> generate_mining_pool(std::size_t n, std::uint64_t seed,
                                                const RunConfig& cfg);

/// 16 pairs in 16 distinct contexts, chosen and rejected of equal length,
/// raw weights spread over [0.4, 3.6].
std::vector<PreferencePair> canonical_toy_pairs();

/// Random expression text over {a, b, x, y} and small integers.
std::string random_expression(std::mt19937_64& rng, int depth);

}  // namespace vgdpo::testing
