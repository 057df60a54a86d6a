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

// Chain-of-thought segmentation and final-answer extraction/normalization.
//
// Normalization rules, in order:
//   - `\dfrac`/`\tfrac` become `\frac`; `\text{..}`, `\mbox{..}` and
//     `\mathrm{..}` are unwrapped; `\%`, `\$` lose the backslash; `\!`, `\,`
//     and `\;` are dropped; `^\circ` reads as "degrees"
//   - ASCII lowercase, all whitespace removed
//   - a comma with a digit before and exactly three digits after is a
//     thousands separator and is removed
//   - a leading `$` and a trailing `.` are dropped
//   - one trailing unit token is stripped when a digit or `}` precedes it
//   - integers, decimals, `a/b` and `\frac{a}{b}` become exact rationals;
//     their canonical text is the integer, a terminating decimal, or `n/d`
//
// The rules are applied until the string stops changing, so normalization is
// idempotent.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vgdpo/common.hpp"

namespace vgdpo {

struct Span {
  std::size_t offset = 0;
  std::size_t length = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct StepList {
  std::vector<std::string> steps;
  std::vector<Span> spans;  // byte range of each step inside the input
};

/// Splits on newlines and on `.`, `!`, `?` followed by whitespace. A leading
/// list marker (`Step 3:`, `3.`, `3)`) is stripped; empty steps are dropped.
StepList segment_steps(std::string_view text);

struct ExtractedAnswer {
  std::optional<std::string> answer;
  bool from_box = false;
  std::size_t offset = 0;  // where `answer` starts inside the input
  std::vector<std::string> diagnostics;
};

/// Contents of the last balanced `\boxed{...}`; otherwise the last number on
/// the final non-empty line.
ExtractedAnswer extract_boxed_answer(std::string_view text);

struct NormalizedAnswer {
  std::string raw;
  std::string canonical;
  std::optional<Rational> numeric;

  friend bool operator==(const NormalizedAnswer&, const NormalizedAnswer&) = default;
};

inline constexpr std::string_view kDefaultUnitTokens[] = {
    "dollars", "$", "%", "degrees", "cm", "m", "kg", "hours", "minutes"};

NormalizedAnswer normalize_answer(std::string_view raw,
                                  std::span<const std::string> extra_units = {});

/// Relative tolerance shared by every relaxed numeric comparison.
inline constexpr double kRelaxedTolerance = 1e-6;

/// |a - b| <= kRelaxedTolerance * max(1, |a|, |b|).
bool relaxed_equal(const Rational& a, const Rational& b);

/// Canonical strings equal, or both numeric and exactly or relaxed equal.
bool answers_match(const NormalizedAnswer& pred, const NormalizedAnswer& gold);

/// Exact value of an integer, decimal, `a/b` or `\frac{a}{b}` literal
/// (optionally signed). Anything else yields nullopt.
std::optional<Rational> parse_number(std::string_view text);

std::string format_rational(const Rational& value);

}  // namespace vgdpo
