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

#include "vgdpo/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vgdpo/common.hpp"

namespace vgdpo {

StepAlignment align_steps(const SimilarityMatrix& sim, std::size_t n_ref, std::size_t n_pred,
                          double threshold) {
  if (sim.size() != n_ref) {
    throw Error(ErrorKind::invalid_argument, "similarity matrix has " +
                                                 std::to_string(sim.size()) + " rows, expected " +
                                                 std::to_string(n_ref));
  }
  for (const auto& row : sim) {
    if (row.size() != n_pred) {
      throw Error(ErrorKind::invalid_argument, "similarity matrix row has " +
                                                   std::to_string(row.size()) +
                                                   " columns, expected " + std::to_string(n_pred));
    }
  }

  // f[i][j]: best score aligning the first i ref and first j pred steps.
  std::vector<std::vector<double>> f(n_ref + 1, std::vector<double>(n_pred + 1, 0.0));
  for (std::size_t i = 1; i <= n_ref; ++i) {
    for (std::size_t j = 1; j <= n_pred; ++j) {
      double diag = f[i - 1][j - 1] + (sim[i - 1][j - 1] - threshold);
      f[i][j] = std::max({diag, f[i - 1][j], f[i][j - 1]});
    }
  }

  StepAlignment out;
  out.score = f[n_ref][n_pred];
  std::size_t i = n_ref;
  std::size_t j = n_pred;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && f[i][j] == f[i - 1][j - 1] + (sim[i - 1][j - 1] - threshold)) {
      --i;
      --j;
      if (sim[i][j] >= threshold) {
        out.matched.push_back({i, j, sim[i][j]});
      } else {
        out.missing_ref.push_back(i);
        out.extra_pred.push_back(j);
      }
    } else if (i > 0 && f[i][j] == f[i - 1][j]) {
      out.missing_ref.push_back(--i);
    } else {
      out.extra_pred.push_back(--j);
    }
  }
  std::reverse(out.matched.begin(), out.matched.end());
  std::sort(out.missing_ref.begin(), out.missing_ref.end());
  std::sort(out.extra_pred.begin(), out.extra_pred.end());
  out.order_pairs = greedy_assignment(sim, threshold);
  return out;
}

StepAlignment align_steps(std::span<const EmbeddingVector> ref,
                          std::span<const EmbeddingVector> pred, double threshold) {
  return align_steps(cosine_sim_matrix(ref, pred), ref.size(), pred.size(), threshold);
}

std::vector<MatchedPair> greedy_assignment(const SimilarityMatrix& sim, double threshold) {
  std::vector<MatchedPair> candidates;
  std::size_t n_pred = 0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    n_pred = std::max(n_pred, sim[i].size());
    for (std::size_t j = 0; j < sim[i].size(); ++j) {
      if (sim[i][j] >= threshold) candidates.push_back({i, j, sim[i][j]});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const MatchedPair& a, const MatchedPair& b) { return a.sim > b.sim; });

  std::vector<bool> ref_used(sim.size(), false);
  std::vector<bool> pred_used(n_pred, false);
  std::vector<MatchedPair> out;
  for (const auto& c : candidates) {
    if (ref_used[c.ref] || pred_used[c.pred]) continue;
    ref_used[c.ref] = pred_used[c.pred] = true;
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(),
            [](const MatchedPair& a, const MatchedPair& b) { return a.ref < b.ref; });
  return out;
}

double score_struct(const StepAlignment& a, std::size_t n_ref, std::size_t n_pred) {
  if (n_ref + n_pred == 0) return 0.0;
  return static_cast<double>(a.missing_ref.size() + a.extra_pred.size()) /
         static_cast<double>(n_ref + n_pred);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t k = 0;
  while (k < idx.size()) {
    std::size_t end = k + 1;
    while (end < idx.size() && values[idx[end]] == values[idx[k]]) ++end;
    // Positions k..end-1 (0-based) share rank mean((k+1)..end).
    double rank = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t t = k; t < end; ++t) ranks[idx[t]] = rank;
    k = end;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::invalid_argument, "spearman_rho: length mismatch");
  }
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  // Mean rank is exactly (n + 1) / 2 with average ranks.
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = rx[i] - mean;
    double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double score_order(std::span<const double> sequence) {
  if (sequence.size() < 2) return 0.0;
  std::vector<double> positions(sequence.size());
  std::iota(positions.begin(), positions.end(), 0.0);
  return (1.0 - spearman_rho(positions, sequence)) / 2.0;
}

double score_order(const StepAlignment& a) {
  std::vector<double> seq;
  seq.reserve(a.order_pairs.size());
  for (const auto& p : a.order_pairs) seq.push_back(static_cast<double>(p.pred));
  return score_order(seq);
}

double mean_best_similarity(const SimilarityMatrix& to_reference, std::size_t n_pred) {
  if (n_pred == 0 || to_reference.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < n_pred; ++t) {
    double best = to_reference[0][t];
    for (std::size_t j = 1; j < to_reference.size(); ++j) best = std::max(best, to_reference[j][t]);
    total += best;
  }
  return total / static_cast<double>(n_pred);
}

double score_sem(const SimilarityMatrix& to_reference, std::size_t n_pred) {
  if (n_pred == 0) return 1.0;
  return std::clamp(1.0 - mean_best_similarity(to_reference, n_pred), 0.0, 1.0);
}

}  // namespace vgdpo
