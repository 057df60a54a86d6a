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

#include "vgdpo/verifier.hpp"

#include <algorithm>
#include <string>

#include "vgdpo/common.hpp"
#include "vgdpo/expr.hpp"
#include "vgdpo/solution_parser.hpp"

namespace vgdpo {

std::vector<std::string> candidate_steps(const CandidateRecord& rec) {
  if (rec.candidate_steps) {
    std::vector<std::string> out;
    for (const auto& s : *rec.candidate_steps) {
      if (s.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(s);
    }
    return out;
  }
  if (rec.candidate_text) return segment_steps(*rec.candidate_text).steps;
  return {};
}

std::optional<std::string> predicted_answer(const CandidateRecord& rec,
                                            std::span<const std::string> steps) {
  if (rec.final_answer_raw) return rec.final_answer_raw;
  std::string text;
  if (rec.candidate_text) {
    text = *rec.candidate_text;
  } else {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (i > 0) text += '\n';
      text += steps[i];
    }
  }
  return extract_boxed_answer(text).answer;
}

FastScan fast_scan(const CandidateRecord& rec, const RunConfig& cfg, SemanticBackend& backend) {
  FastScan out;
  out.pred_steps = candidate_steps(rec);
  const std::size_t n_ref = rec.reference_steps.size();
  const std::size_t n_pred = out.pred_steps.size();

  std::vector<std::string> texts;
  texts.reserve(1 + n_ref + n_pred);
  texts.push_back(rec.question);
  texts.insert(texts.end(), rec.reference_steps.begin(), rec.reference_steps.end());
  texts.insert(texts.end(), out.pred_steps.begin(), out.pred_steps.end());
  auto vecs = backend.embed_batch(texts);

  std::span<const EmbeddingVector> all(vecs);
  auto ref = all.subspan(1, n_ref);
  auto pred = all.subspan(1 + n_ref, n_pred);
  out.sims.to_question.reserve(n_pred);
  for (const auto& v : pred) out.sims.to_question.push_back(cosine(all[0], v));
  out.sims.to_reference = cosine_sim_matrix(ref, pred);

  out.s_sem = score_sem(out.sims.to_reference, n_pred);
  out.mean_best_ref_sim = mean_best_similarity(out.sims.to_reference, n_pred);

  const double thr = cfg.match_threshold;
  const auto& m = out.sims.to_reference;
  for (std::size_t j = 0; j < n_ref; ++j) {
    bool covered = false;
    for (std::size_t t = 0; t < n_pred; ++t) covered = covered || m[j][t] >= thr;
    if (!covered) ++out.ref_uncovered;
  }
  for (std::size_t t = 0; t < n_pred; ++t) {
    bool used = false;
    for (std::size_t j = 0; j < n_ref; ++j) used = used || m[j][t] >= thr;
    if (!used) ++out.pred_redundant;
  }
  return out;
}

double score_logic(std::string_view question, std::span<const std::string> steps,
                   SemanticBackend& backend) {
  std::vector<NliPair> pairs;
  for (std::size_t t = 1; t < steps.size(); ++t) pairs.push_back({steps[t - 1], steps[t]});
  for (const auto& s : steps) pairs.push_back({std::string(question), s});
  if (pairs.empty()) return 0.0;
  auto verdicts = backend.judge_batch(pairs);
  auto contradictions = std::count_if(verdicts.begin(), verdicts.end(), [](const NliVerdict& v) {
    return v.label == NliLabel::contradict;
  });
  return static_cast<double>(contradictions) / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// Equations

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Bytes of a multi-byte operator at s[i], or 0.
std::size_t utf8_operator(std::string_view s, std::size_t i) {
  for (std::string_view op : {"\xC3\x97", "\xC3\xB7", "\xC2\xB7", "\xE2\x88\x92"}) {
    if (s.substr(i).starts_with(op)) return op.size();
  }
  return 0;
}

// Number of bytes at s[i] that belong to a math run, or 0.
std::size_t math_width(std::string_view s, std::size_t i) {
  char c = s[i];
  if (is_digit(c) || std::string_view("+-*/^()= $").find(c) != std::string_view::npos) return 1;
  if (c == '.' || c == ',') {
    bool digit_after = i + 1 < s.size() && is_digit(s[i + 1]);
    bool digit_before = i > 0 && is_digit(s[i - 1]);
    return (c == '.' ? digit_after : digit_after && digit_before) ? 1 : 0;
  }
  if (is_alpha(c)) {
    bool alone = (i == 0 || !is_alpha(s[i - 1])) && (i + 1 >= s.size() || !is_alpha(s[i + 1]));
    return alone ? 1 : 0;
  }
  return utf8_operator(s, i);
}

// Drops unmatched parentheses and dangling operators at either end.
std::string tidy_piece(std::string piece) {
  std::vector<bool> keep(piece.size(), true);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < piece.size(); ++i) {
    if (piece[i] == '(') {
      open.push_back(i);
    } else if (piece[i] == ')') {
      if (open.empty()) {
        keep[i] = false;
      } else {
        open.pop_back();
      }
    }
  }
  for (auto i : open) keep[i] = false;
  std::string out;
  for (std::size_t i = 0; i < piece.size(); ++i) {
    if (keep[i]) out += piece[i];
  }
  while (!out.empty() && std::string_view("+-*/^").find(out.back()) != std::string_view::npos) {
    out.pop_back();
  }
  while (!out.empty() && std::string_view("+*/^").find(out.front()) != std::string_view::npos) {
    out.erase(out.begin());
  }
  return out;
}

}  // namespace

std::vector<std::string> extract_equation(std::string_view step) {
  std::string_view best;
  std::size_t i = 0;
  while (i < step.size()) {
    std::size_t w = math_width(step, i);
    if (w == 0) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < step.size() && (w = math_width(step, i)) > 0) i += w;
    std::string_view run = step.substr(start, i - start);
    if (run.find('=') != std::string_view::npos) best = run;
  }
  if (best.empty()) return {};

  std::string compact;
  for (char c : best) {
    if (c != ' ' && c != '$' && c != ',') compact += c;
  }
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start <= compact.size()) {
    auto eq = compact.find('=', start);
    std::string piece = tidy_piece(compact.substr(start, eq == std::string::npos ? std::string::npos : eq - start));
    if (!piece.empty()) pieces.push_back(std::move(piece));
    if (eq == std::string::npos) break;
    start = eq + 1;
  }
  return pieces;
}

std::vector<SymComparison> sym_comparisons(std::span<const std::string> ref_steps,
                                           std::span<const std::string> pred_steps,
                                           const StepAlignment& alignment,
                                           const std::optional<std::string>& pred_answer,
                                           const std::string& ref_answer,
                                           const RunConfig& cfg) {
  std::vector<SymComparison> out;
  for (const auto& m : alignment.matched) {
    auto r = extract_equation(ref_steps[m.ref]);
    auto p = extract_equation(pred_steps[m.pred]);
    std::size_t n = std::min(r.size(), p.size());
    for (std::size_t k = n; k > 0; --k) {
      const auto& rp = r[r.size() - k];
      const auto& pp = p[p.size() - k];
      out.push_back({pp, rp, classify_mismatch(pp, rp)});
    }
  }
  if (pred_answer) {
    auto p = normalize_answer(*pred_answer, cfg.extra_unit_tokens).canonical;
    auto r = normalize_answer(ref_answer, cfg.extra_unit_tokens).canonical;
    out.push_back({p, r, classify_mismatch(p, r)});
  }
  return out;
}

double score_sym(std::span<const SymComparison> comparisons, const SymPenalties& penalties) {
  if (comparisons.empty()) return 0.0;
  double total = 0.0;
  for (const auto& c : comparisons) {
    switch (c.outcome) {
      case MismatchClass::equivalent: total += penalties.equivalent; break;
      case MismatchClass::numeric_slip: total += penalties.numeric_slip; break;
      case MismatchClass::symbolic_error: total += penalties.symbolic_error; break;
      case MismatchClass::incomparable: total += penalties.incomparable; break;
    }
  }
  return total / static_cast<double>(comparisons.size());
}

double score_ans(const std::optional<std::string>& pred_answer, const std::string& ref_answer,
                 std::span<const std::string> extra_units) {
  if (!pred_answer) return 1.0;
  return answers_match(normalize_answer(*pred_answer, extra_units),
                       normalize_answer(ref_answer, extra_units))
             ? 0.0
             : 1.0;
}

// ---------------------------------------------------------------------------
// Aggregation

double aggregate_wrongness(std::span<const double, kNumDimensions> s,
                           std::span<const double, kNumDimensions> w) {
  double total = 0.0;
  for (std::size_t k = 0; k < kNumDimensions; ++k) total += w[k] * s[k];
  return total;
}

double aggregate_absurdity(std::span<const double, kNumDimensions> s, const AbsurdityWeights& a) {
  auto at = [&](Dimension d) { return s[static_cast<std::size_t>(d)]; };
  return a.logic * at(Dimension::logic) + a.structure * at(Dimension::structure) +
         a.order * at(Dimension::order) + a.sem * at(Dimension::sem);
}

double raw_weight(double wrongness, double confidence, double perplexity) {
  return wrongness + (1.0 - confidence) + perplexity / 100.0;
}

Dimension primary_error(std::span<const double, kNumDimensions> s) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumDimensions; ++k) {
    if (s[k] > s[best]) best = k;
  }
  return static_cast<Dimension>(best);
}

void finalize_profile(ErrorProfile& p, const RunConfig& cfg, double confidence, double perplexity) {
  p.wrongness = aggregate_wrongness(p.s, cfg.dimension_weights);
  p.absurdity = aggregate_absurdity(p.s, cfg.alpha);
  p.w_raw = raw_weight(p.wrongness, confidence, perplexity);
  p.primary_error = primary_error(p.s);
}

// ---------------------------------------------------------------------------
// Channels

namespace {

double fraction(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

void fill_fast_fields(ErrorProfile& p, const FastScan& fast, std::size_t n_ref) {
  p[Dimension::sem] = fast.s_sem;
  p.mean_best_ref_sim = fast.mean_best_ref_sim;
  p.ref_uncovered = fraction(fast.ref_uncovered, n_ref);
  p.pred_redundant = fraction(fast.pred_redundant, fast.pred_steps.size());
}

template <typename F>
void guarded(ErrorProfile& p, std::initializer_list<Dimension> dims, F&& compute) {
  try {
    compute();
  } catch (const std::exception& e) {
    for (auto d : dims) {
      p[d] = 0.5;
      p.diagnostics.push_back("s_" + std::string(to_string(d)) + ": " + e.what());
    }
  }
}

ErrorProfile fine_from_scan(const CandidateRecord& rec, const FastScan& fast,
                            const RunConfig& cfg, SemanticBackend& backend) {
  ErrorProfile p;
  p.channel = Channel::fine;
  const std::size_t n_ref = rec.reference_steps.size();
  const std::size_t n_pred = fast.pred_steps.size();
  fill_fast_fields(p, fast, n_ref);

  StepAlignment alignment;
  guarded(p, {Dimension::structure, Dimension::order}, [&] {
    alignment = align_steps(fast.sims.to_reference, n_ref, n_pred, cfg.match_threshold);
    p[Dimension::structure] = score_struct(alignment, n_ref, n_pred);
    p[Dimension::order] = score_order(alignment);
  });
  guarded(p, {Dimension::logic},
          [&] { p[Dimension::logic] = score_logic(rec.question, fast.pred_steps, backend); });

  auto answer = predicted_answer(rec, fast.pred_steps);
  guarded(p, {Dimension::sym}, [&] {
    auto comps = sym_comparisons(rec.reference_steps, fast.pred_steps, alignment, answer,
                                 rec.reference_answer, cfg);
    p[Dimension::sym] = score_sym(comps, cfg.sym);
  });
  guarded(p, {Dimension::ans}, [&] {
    p[Dimension::ans] = score_ans(answer, rec.reference_answer, cfg.extra_unit_tokens);
  });

  finalize_profile(p, cfg, rec.confidence, rec.perplexity);
  return p;
}

}  // namespace

ErrorProfile fine_analyze(const CandidateRecord& rec, const RunConfig& cfg,
                          SemanticBackend& backend) {
  return fine_from_scan(rec, fast_scan(rec, cfg, backend), cfg, backend);
}

bool fine_sampled(std::string_view problem_id, int candidate_index, std::uint64_t seed,
                  double fine_fraction) {
  if (fine_fraction >= 1.0) return true;
  if (fine_fraction <= 0.0) return false;
  std::uint64_t h = fnv1a64(problem_id);
  h = fnv1a64(std::string_view("\0", 1), h);
  h = fnv1a64(std::to_string(candidate_index), h);
  h = fnv1a64(std::string_view("\0", 1), h);
  h = fnv1a64(std::to_string(seed), h);
  return unit_interval(h) < fine_fraction;
}

Report verify_candidate(const CandidateRecord& rec, const RunConfig& cfg,
                        SemanticBackend& backend) {
  FastScan fast = fast_scan(rec, cfg, backend);

  Report r;
  r.problem_id = rec.problem_id;
  r.candidate_index = rec.candidate_index;
  r.confidence = rec.confidence;
  r.perplexity = rec.perplexity;
  r.reference_answer = rec.reference_answer;
  r.pred_answer = predicted_answer(rec, fast.pred_steps);
  r.pred_steps = fast.pred_steps;

  if (fine_sampled(rec.problem_id, rec.candidate_index, cfg.seed, cfg.fine_fraction)) {
    r.profile = fine_from_scan(rec, fast, cfg, backend);
    return r;
  }

  ErrorProfile& p = r.profile;
  p.channel = Channel::fast_only;
  const std::size_t n_ref = rec.reference_steps.size();
  fill_fast_fields(p, fast, n_ref);
  p[Dimension::structure] =
      fraction(fast.ref_uncovered + fast.pred_redundant, n_ref + fast.pred_steps.size());
  p[Dimension::ans] = score_ans(r.pred_answer, rec.reference_answer, cfg.extra_unit_tokens);
  finalize_profile(p, cfg, rec.confidence, rec.perplexity);
  return r;
}

}  // namespace vgdpo
