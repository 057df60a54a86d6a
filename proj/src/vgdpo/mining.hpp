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
#include <string>
#include <vector>

#include "vgdpo/config.hpp"
#include "vgdpo/records.hpp"

namespace vgdpo {

// Indices into the report list passed to filter_learnable.
struct Buckets {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives_pool;
  std::vector<std::size_t> discarded;
  // Near-zero wrongness with a wrong final answer; also in `discarded`.
  std::vector<std::size_t> inconsistent;
};

/// In order: degenerate (wrongness above the ceiling, or fewer than
/// min_steps steps) is discarded; a correct answer with low absurdity is a
/// positive; wrongness under the floor is discarded; the rest is the
/// negatives pool.
Buckets filter_learnable(std::span<const Report> reports, const MiningThresholds& t);

struct HardNegativeVerdict {
  bool hard = false;
  std::vector<std::string> tags;  // disjuncts of (ii) and (iii) that fired
};

/// Relative distance |p - r| <= near_miss_rel * |r| between numeric answers
/// that do not match; false for r = 0 or a non-numeric side.
bool numeric_near_miss(const Report& r, double near_miss_rel,
                       std::span<const std::string> extra_units = {});

HardNegativeVerdict is_hard_negative(const Report& r, const MiningThresholds& t,
                                     std::span<const std::string> extra_units = {});

/// Toy-policy payload: a context bucket for the problem and token ids for the
/// last (up to 8) words of the solution.
inline constexpr std::size_t kToyMaxTokens = 8;
int toy_context(const std::string& problem_id, int contexts);
std::vector<int> toy_tokens(std::span<const std::string> steps, int vocab);

/// Per problem: the positive with the lowest absurdity (then wrongness, then
/// candidate index) against up to `cap` hard negatives by descending w_raw.
/// Output is ordered by problem_id, then w_raw descending.
std::vector<PreferencePair> build_pairs(std::span<const Report> reports,
                                        std::span<const std::size_t> positives,
                                        std::span<const std::size_t> hard_negatives,
                                        const std::vector<std::vector<std::string>>& hard_tags,
                                        int cap, const RunConfig& cfg);

struct MiningResult {
  Buckets buckets;
  std::vector<std::size_t> hard_negatives;
  std::vector<PreferencePair> pairs;
};

MiningResult mine(std::span<const Report> reports, const RunConfig& cfg);

}  // namespace vgdpo
