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
#include <string_view>
#include <vector>

#include "vgdpo/records.hpp"

namespace vgdpo {

/// Extract the final boxed answer, normalize both sides, compare with
/// answers_match.
EvalRecord grade_prediction(std::string_view problem_id, std::string_view prediction_text,
                            std::string_view gold_answer,
                            std::span<const std::string> extra_units = {});

struct EvalSummary {
  double accuracy = 0.0;
  std::size_t n = 0;
  std::size_t correct = 0;
};

/// Joins predictions to gold on problem_id (both directions must match
/// one-to-one) and grades in prediction order.
EvalSummary evaluate(std::span<const PredictionRecord> predictions,
                     std::span<const GoldRecord> gold, std::vector<EvalRecord>& out,
                     std::span<const std::string> extra_units = {});

}  // namespace vgdpo
