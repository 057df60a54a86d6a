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

#include "vgdpo/mining.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "vgdpo/common.hpp"
#include "vgdpo/semantic_backend.hpp"
#include "vgdpo/solution_parser.hpp"

namespace vgdpo {

Buckets filter_learnable(std::span<const Report> reports, const MiningThresholds& t) {
  Buckets b;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto& p = r.profile;
    const bool correct = p[Dimension::ans] == 0.0;
    if (p.wrongness > t.degenerate_ceiling ||
        r.pred_steps.size() < static_cast<std::size_t>(t.min_steps)) {
      b.discarded.push_back(i);
    } else if (correct && p.absurdity <= t.positive_absurdity_max) {
      b.positives.push_back(i);
    } else if (p.wrongness < t.trivial_floor) {
      b.discarded.push_back(i);
      if (!correct) b.inconsistent.push_back(i);
    } else {
      b.negatives_pool.push_back(i);
    }
  }
  return b;
}

bool numeric_near_miss(const Report& r, double near_miss_rel,
                       std::span<const std::string> extra_units) {
  if (!r.pred_answer) return false;
  auto pred = normalize_answer(*r.pred_answer, extra_units);
  auto ref = normalize_answer(r.reference_answer, extra_units);
  if (!pred.numeric || !ref.numeric || ref.numeric->is_zero()) return false;
  if (answers_match(pred, ref)) return false;
  Rational diff = abs(*pred.numeric - *ref.numeric);
  Rational bound = abs(*ref.numeric) * Rational(near_miss_rel);
  return diff <= bound;
}

HardNegativeVerdict is_hard_negative(const Report& r, const MiningThresholds& t,
                                     std::span<const std::string> extra_units) {
  HardNegativeVerdict v;
  const auto& p = r.profile;
  const bool confident = r.confidence >= t.min_confidence;

  bool near = false;
  if (numeric_near_miss(r, t.near_miss_rel, extra_units)) {
    v.tags.push_back("near_miss_numeric");
    near = true;
  }
  if (p.mean_best_ref_sim >= t.near_sem) {
    v.tags.push_back("near_miss_semantic");
    near = true;
  }

  const bool in_band = p.wrongness >= t.wrongness_lo && p.wrongness <= t.wrongness_hi;
  bool structural = false;
  if (p.absurdity >= t.min_absurdity) {
    v.tags.push_back("absurdity_trigger");
    structural = true;
  }
  const std::pair<Dimension, const char*> triggers[] = {{Dimension::structure, "struct_trigger"},
                                                        {Dimension::logic, "logic_trigger"},
                                                        {Dimension::order, "order_trigger"}};
  for (const auto& [dim, tag] : triggers) {
    if (p[dim] >= t.struct_dim_trigger) {
      v.tags.push_back(tag);
      structural = true;
    }
  }

  v.hard = confident && near && in_band && structural;
  return v;
}

int toy_context(const std::string& problem_id, int contexts) {
  return static_cast<int>(fnv1a64(problem_id) % static_cast<std::uint64_t>(contexts));
}

std::vector<int> toy_tokens(std::span<const std::string> steps, int vocab) {
  std::vector<std::string> words;
  for (const auto& s : steps) {
    auto w = tokenize(s);
    words.insert(words.end(), w.begin(), w.end());
  }
  std::size_t start = words.size() > kToyMaxTokens ? words.size() - kToyMaxTokens : 0;
  std::vector<int> out;
  for (std::size_t i = start; i < words.size(); ++i) {
    out.push_back(static_cast<int>(fnv1a64(words[i]) % static_cast<std::uint64_t>(vocab)));
  }
  return out;
}

std::vector<PreferencePair> build_pairs(std::span<const Report> reports,
                                        std::span<const std::size_t> positives,
                                        std::span<const std::size_t> hard_negatives,
                                        const std::vector<std::vector<std::string>>& hard_tags,
                                        int cap, const RunConfig& cfg) {
  if (hard_tags.size() != hard_negatives.size()) {
    throw Error(ErrorKind::invalid_argument, "build_pairs: one tag list per hard negative");
  }
  std::map<std::string, std::size_t> chosen;
  for (std::size_t i : positives) {
    const auto& r = reports[i];
    auto [it, fresh] = chosen.try_emplace(r.problem_id, i);
    if (fresh) continue;
    const auto& cur = reports[it->second];
    auto key = [](const Report& x) {
      return std::make_tuple(x.profile.absurdity, x.profile.wrongness, x.candidate_index);
    };
    if (key(r) < key(cur)) it->second = i;
  }

  std::map<std::string, std::vector<std::size_t>> negatives;  // positions in hard_negatives
  for (std::size_t k = 0; k < hard_negatives.size(); ++k) {
    negatives[reports[hard_negatives[k]].problem_id].push_back(k);
  }

  std::vector<PreferencePair> out;
  for (auto& [problem, ks] : negatives) {
    auto c = chosen.find(problem);
    if (c == chosen.end()) continue;
    std::stable_sort(ks.begin(), ks.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = reports[hard_negatives[a]];
      const auto& rb = reports[hard_negatives[b]];
      if (ra.profile.w_raw != rb.profile.w_raw) return ra.profile.w_raw > rb.profile.w_raw;
      return ra.candidate_index < rb.candidate_index;
    });
    const auto& pos = reports[c->second];
    std::size_t take = std::min(ks.size(), static_cast<std::size_t>(std::max(cap, 0)));
    for (std::size_t n = 0; n < take; ++n) {
      const auto& neg = reports[hard_negatives[ks[n]]];
      PreferencePair pair;
      pair.problem_id = problem;
      pair.chosen_index = pos.candidate_index;
      pair.rejected_index = neg.candidate_index;
      pair.w_raw = neg.profile.w_raw;
      pair.tags = hard_tags[ks[n]];
      pair.context = toy_context(problem, cfg.toy_contexts);
      pair.chosen_tokens = toy_tokens(pos.pred_steps, cfg.toy_vocab);
      pair.rejected_tokens = toy_tokens(neg.pred_steps, cfg.toy_vocab);
      out.push_back(std::move(pair));
    }
  }
  return out;
}

MiningResult mine(std::span<const Report> reports, const RunConfig& cfg) {
  MiningResult res;
  res.buckets = filter_learnable(reports, cfg.thresholds);
  std::vector<std::vector<std::string>> tags;
  for (std::size_t i : res.buckets.negatives_pool) {
    auto v = is_hard_negative(reports[i], cfg.thresholds, cfg.extra_unit_tokens);
    if (v.hard) {
      res.hard_negatives.push_back(i);
      tags.push_back(std::move(v.tags));
    }
  }
  res.pairs = build_pairs(reports, res.buckets.positives, res.hard_negatives, tags,
                          cfg.thresholds.per_problem_cap, cfg);
  return res;
}

}  // namespace vgdpo
