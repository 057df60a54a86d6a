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

#include "vgdpo/dpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "vgdpo/common.hpp"

namespace vgdpo {

double dpo_margin(const LogProbQuad& q, double beta) {
  return beta * ((q.pol_pos - q.pol_neg) - (q.ref_pos - q.ref_neg));
}

double neg_log_sigmoid(double z) {
  return std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double dpo_loss(const LogProbQuad& q, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::numeric, "beta must be a positive finite number");
  }
  for (double v : {q.pol_pos, q.pol_neg, q.ref_pos, q.ref_neg}) {
    if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "non-finite log-probability");
  }
  return neg_log_sigmoid(dpo_margin(q, beta));
}

WeightBatch normalize_weights(std::span<const double> raw, double lambda, double w_min,
                              double w_max) {
  if (raw.empty()) throw Error(ErrorKind::invalid_argument, "empty weight batch");
  double sum = 0.0;
  for (double w : raw) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::invalid_argument,
                  "raw weight must be positive and finite, got " + std::to_string(w));
    }
    sum += w;
  }
  WeightBatch b;
  b.raw.assign(raw.begin(), raw.end());
  b.lambda = lambda;
  b.w_min = w_min;
  b.w_max = w_max;
  const double mean = sum / static_cast<double>(raw.size());
  for (double w : raw) {
    double n = w / mean;
    double e = 1.0 + lambda * (n - 1.0);
    b.normalized.push_back(n);
    b.effective.push_back(e);
    b.final.push_back(std::clamp(e, w_min, w_max));
  }
  return b;
}

double weighted_batch_loss(std::span<const LogProbQuad> quads, std::span<const double> weights,
                           double beta) {
  if (quads.size() != weights.size()) {
    throw Error(ErrorKind::invalid_argument,
                "weighted_batch_loss: " + std::to_string(quads.size()) + " pairs but " +
                    std::to_string(weights.size()) + " weights");
  }
  if (quads.empty()) throw Error(ErrorKind::invalid_argument, "empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < quads.size(); ++i) total += weights[i] * dpo_loss(quads[i], beta);
  return total / static_cast<double>(quads.size());
}

ToyPolicy::ToyPolicy(int vocab_size, int n_contexts) : vocab(vocab_size), contexts(n_contexts) {
  if (vocab < 1 || vocab > kToyMaxVocab || contexts < 1 || contexts > kToyMaxContexts) {
    throw Error(ErrorKind::invalid_argument, "toy policy supports vocab 1..50 and contexts 1..20");
  }
  theta.assign(static_cast<std::size_t>(vocab) * static_cast<std::size_t>(contexts), 0.0);
}

double toy_logprob(const ToyPolicy& policy, int context, std::span<const int> tokens,
                   std::vector<double>* grad, double scale) {
  if (context < 0 || context >= policy.contexts) {
    throw Error(ErrorKind::invalid_argument, "context " + std::to_string(context) + " out of range");
  }
  double mx = policy.at(context, 0);
  for (int v = 1; v < policy.vocab; ++v) mx = std::max(mx, policy.at(context, v));
  double z = 0.0;
  for (int v = 0; v < policy.vocab; ++v) z += std::exp(policy.at(context, v) - mx);
  const double log_z = mx + std::log(z);

  double lp = 0.0;
  for (int t : tokens) {
    if (t < 0 || t >= policy.vocab) {
      throw Error(ErrorKind::invalid_argument, "token " + std::to_string(t) + " out of vocabulary");
    }
    lp += policy.at(context, t) - log_z;
  }
  if (grad) {
    const double len = static_cast<double>(tokens.size());
    for (int v = 0; v < policy.vocab; ++v) {
      double p = std::exp(policy.at(context, v) - log_z);
      (*grad)[policy.index(context, v)] -= scale * len * p;
    }
    for (int t : tokens) (*grad)[policy.index(context, t)] += scale;
  }
  return lp;
}

double toy_batch_loss(const ToyPolicy& policy, const ToyPolicy& reference,
                      std::span<const PreferencePair> pairs, std::span<const double> weights,
                      double beta, std::vector<double>* margins, std::vector<double>* grad,
                      double* unweighted) {
  if (pairs.size() != weights.size()) {
    throw Error(ErrorKind::invalid_argument, "toy_batch_loss: pairs/weights length mismatch");
  }
  if (pairs.empty()) throw Error(ErrorKind::invalid_argument, "empty batch");
  const double b = static_cast<double>(pairs.size());
  if (grad) grad->assign(policy.theta.size(), 0.0);
  if (margins) margins->clear();

  std::vector<LogProbQuad> quads;
  quads.reserve(pairs.size());
  for (const auto& p : pairs) {
    quads.push_back({toy_logprob(policy, p.context, p.chosen_tokens),
                     toy_logprob(policy, p.context, p.rejected_tokens),
                     toy_logprob(reference, p.context, p.chosen_tokens),
                     toy_logprob(reference, p.context, p.rejected_tokens)});
  }
  double plain = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    double z = dpo_margin(quads[i], beta);
    if (margins) margins->push_back(z);
    plain += dpo_loss(quads[i], beta);
    if (grad) {
      // d/dz softplus(-z) = -sigmoid(-z)
      double dz = -1.0 / (1.0 + std::exp(z));
      double scale = weights[i] * dz * beta / b;
      toy_logprob(policy, pairs[i].context, pairs[i].chosen_tokens, grad, scale);
      toy_logprob(policy, pairs[i].context, pairs[i].rejected_tokens, grad, -scale);
    }
  }
  if (unweighted) *unweighted = plain / b;
  return weighted_batch_loss(quads, weights, beta);
}

ToyRun train_toy(std::span<const PreferencePair> pairs, const RunConfig& cfg, int steps,
                 std::uint64_t seed) {
  if (steps < 0) throw Error(ErrorKind::invalid_argument, "steps must be >= 0");
  if (pairs.empty()) throw Error(ErrorKind::invalid_argument, "no preference pairs to train on");

  ToyRun run;
  run.policy = ToyPolicy(cfg.toy_vocab, cfg.toy_contexts);
  if (cfg.init_scale != 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& t : run.policy.theta) t = cfg.init_scale * normal(rng);
  }
  const ToyPolicy reference = run.policy;

  std::vector<double> raw;
  raw.reserve(pairs.size());
  for (const auto& p : pairs) raw.push_back(p.w_raw);
  run.weights = normalize_weights(raw, cfg.lambda, cfg.w_min, cfg.w_max);

  auto start = std::chrono::steady_clock::now();
  std::vector<double> grad;
  for (int step = 0; step <= steps; ++step) {
    TraceRecord rec;
    rec.step = step;
    bool update = step < steps;
    rec.loss = toy_batch_loss(run.policy, reference, pairs, run.weights.final, cfg.beta,
                              &rec.margins, update ? &grad : nullptr, &rec.unweighted_loss);
    if (!std::isfinite(rec.loss)) {
      throw Error(ErrorKind::numeric, "loss diverged at step " + std::to_string(step));
    }
    rec.weights = run.weights.final;
    rec.elapsed_ms = cfg.deterministic
                         ? 0.0
                         : std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    run.trace.push_back(std::move(rec));
    if (update) {
      for (std::size_t k = 0; k < grad.size(); ++k) {
        run.policy.theta[k] -= cfg.learning_rate * grad[k];
      }
    }
  }
  return run;
}

}  // namespace vgdpo
