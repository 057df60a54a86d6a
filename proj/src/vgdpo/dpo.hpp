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
#include <span>
#include <vector>

#include "vgdpo/config.hpp"
#include "vgdpo/records.hpp"

namespace vgdpo {

struct LogProbQuad {
  double pol_pos = 0.0;
  double pol_neg = 0.0;
  double ref_pos = 0.0;
  double ref_neg = 0.0;
};

/// beta * ((pol_pos - pol_neg) - (ref_pos - ref_neg)).
double dpo_margin(const LogProbQuad& q, double beta);

/// -log(sigmoid(z)) evaluated as max(-z, 0) + log1p(exp(-|z|)).
double neg_log_sigmoid(double z);

/// Throws Error(numeric) on non-finite input or beta <= 0.
double dpo_loss(const LogProbQuad& q, double beta);

struct WeightBatch {
  std::vector<double> raw;
  std::vector<double> normalized;  // raw / mean(raw)
  std::vector<double> effective;   // 1 + lambda * (normalized - 1)
  std::vector<double> final;       // clip(effective, w_min, w_max)
  double lambda = 0.0;
  double w_min = 0.0;
  double w_max = 0.0;
};

WeightBatch normalize_weights(std::span<const double> raw, double lambda, double w_min,
                              double w_max);

/// (1/B) * sum_i w_i * loss_i.
double weighted_batch_loss(std::span<const LogProbQuad> quads, std::span<const double> weights,
                           double beta);

/// theta[context][token], row-major.
struct ToyPolicy {
  int vocab = 0;
  int contexts = 0;
  std::vector<double> theta;

  ToyPolicy() = default;
  ToyPolicy(int vocab, int contexts);

  double& at(int context, int token) { return theta[index(context, token)]; }
  double at(int context, int token) const { return theta[index(context, token)]; }
  std::size_t index(int context, int token) const {
    return static_cast<std::size_t>(context) * static_cast<std::size_t>(vocab) +
           static_cast<std::size_t>(token);
  }
};

inline constexpr int kToyMaxVocab = 50;
inline constexpr int kToyMaxContexts = 20;

/// sum_t (theta[x, y_t] - logsumexp_v theta[x, v]). When `grad` is given,
/// adds scale * d(log pi)/d(theta) into it.
double toy_logprob(const ToyPolicy& policy, int context, std::span<const int> tokens,
                   std::vector<double>* grad = nullptr, double scale = 1.0);

/// Weighted DPO batch loss of `pairs` under (policy, reference); fills the
/// per-pair margins and, when asked, the gradient with respect to policy.
double toy_batch_loss(const ToyPolicy& policy, const ToyPolicy& reference,
                      std::span<const PreferencePair> pairs, std::span<const double> weights,
                      double beta, std::vector<double>* margins = nullptr,
                      std::vector<double>* grad = nullptr, double* unweighted = nullptr);

struct ToyRun {
  std::vector<TraceRecord> trace;  // steps 0..N, loss before each update
  WeightBatch weights;
  ToyPolicy policy;
};

/// Full-batch gradient descent from theta = init_scale * N(0, 1) (seeded);
/// the reference is a frozen copy of the initial policy. Throws
/// Error(numeric) if the loss stops being finite.
ToyRun train_toy(std::span<const PreferencePair> pairs, const RunConfig& cfg, int steps,
                 std::uint64_t seed);

}  // namespace vgdpo
