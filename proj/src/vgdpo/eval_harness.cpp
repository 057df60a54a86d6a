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

#include "vgdpo/eval_harness.hpp"

#include <map>
#include <set>

#include "vgdpo/common.hpp"
#include "vgdpo/solution_parser.hpp"

namespace vgdpo {

EvalRecord grade_prediction(std::string_view problem_id, std::string_view prediction_text,
                            std::string_view gold_answer,
                            std::span<const std::string> extra_units) {
  EvalRecord rec;
  rec.problem_id = problem_id;
  rec.prediction_text = prediction_text;
  rec.gold_answer = gold_answer;

  auto extracted = extract_boxed_answer(prediction_text);
  rec.diagnostics = extracted.diagnostics;
  if (!extracted.answer) return rec;

  auto pred = normalize_answer(*extracted.answer, extra_units);
  auto gold = normalize_answer(gold_answer, extra_units);
  rec.extracted_raw = pred.raw;
  rec.extracted_canonical = pred.canonical;
  if (pred.numeric) rec.extracted_numeric = pred.numeric->str();
  rec.correct = answers_match(pred, gold);
  return rec;
}

EvalSummary evaluate(std::span<const PredictionRecord> predictions,
                     std::span<const GoldRecord> gold, std::vector<EvalRecord>& out,
                     std::span<const std::string> extra_units) {
  if (gold.empty()) throw Error(ErrorKind::invalid_argument, "gold file is empty");

  std::map<std::string, const GoldRecord*> by_id;
  for (const auto& g : gold) {
    if (!by_id.emplace(g.problem_id, &g).second) {
      throw Error(ErrorKind::invalid_argument, "duplicate gold problem_id '" + g.problem_id + "'");
    }
  }
  std::set<std::string> seen;
  for (const auto& p : predictions) {
    if (!by_id.contains(p.problem_id)) {
      throw Error(ErrorKind::invalid_argument,
                  "prediction for unknown problem_id '" + p.problem_id + "'");
    }
    if (!seen.insert(p.problem_id).second) {
      throw Error(ErrorKind::invalid_argument,
                  "duplicate prediction for problem_id '" + p.problem_id + "'");
    }
  }
  for (const auto& [id, _] : by_id) {
    if (!seen.contains(id)) {
      throw Error(ErrorKind::invalid_argument, "no prediction for problem_id '" + id + "'");
    }
  }

  out.clear();
  EvalSummary s;
  for (const auto& p : predictions) {
    out.push_back(
        grade_prediction(p.problem_id, p.prediction_text, by_id.at(p.problem_id)->answer, extra_units));
    if (out.back().correct) ++s.correct;
  }
  s.n = out.size();
  s.accuracy = static_cast<double>(s.correct) / static_cast<double>(s.n);
  return s;
}

}  // namespace vgdpo
