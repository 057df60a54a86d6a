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

#include "vgdpo/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vgdpo/common.hpp"
#include "vgdpo/dpo.hpp"
#include "vgdpo/mining.hpp"
#include "vgdpo/sim_server.hpp"
#include "vgdpo/verifier.hpp"

namespace vgdpo {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::filesystem::path sidecar(const std::filesystem::path& out, const char* suffix) {
  auto p = out;
  p += suffix;
  return p;
}

void write_errors(const std::filesystem::path& out, const std::vector<RecordFailure>& failures) {
  auto path = sidecar(out, ".errors.jsonl");
  if (failures.empty()) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    return;
  }
  std::vector<std::string> lines;
  for (const auto& f : failures) {
    json j{{"line", f.line}, {"error", f.message}};
    if (!f.problem_id.empty()) j["problem_id"] = f.problem_id;
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

template <typename T>
void add_load_errors(const Loaded<T>& loaded, std::vector<RecordFailure>& failures) {
  for (const auto& e : loaded.errors) failures.push_back({e.line, "", e.message});
}

// The run's effective config, minus keys that never change outputs.
std::string echoed_config(const RunConfig& cfg) {
  std::istringstream in(config_to_text(cfg));
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.starts_with("workers ") || line.starts_with("deterministic ")) continue;
    out += line;
    out += '\n';
  }
  return out;
}

void write_summary(const std::filesystem::path& out, const RunConfig& cfg, const char* command,
                   json counts, double elapsed_ms) {
  json j{{"command", command}, {"counts", std::move(counts)}, {"config", echoed_config(cfg)}};
  if (cfg.deterministic) {
    j["timestamp"] = 0;
    j["elapsed_ms"] = 0.0;
  } else {
    j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    j["elapsed_ms"] = elapsed_ms;
  }
  write_lines(sidecar(out, ".summary.json"), {j.dump(2)});
}

}  // namespace

std::vector<Report> verify_records(std::span<const CandidateRecord> records,
                                   const RunConfig& cfg, SemanticBackend& backend,
                                   std::vector<RecordFailure>& failures) {
  std::vector<std::optional<Report>> results(records.size());
  std::vector<std::string> errors(records.size());
  parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
    try {
      results[i] = verify_candidate(records[i], cfg, backend);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::vector<Report> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (results[i]) {
      out.push_back(std::move(*results[i]));
    } else {
      failures.push_back({0, records[i].problem_id, errors[i]});
    }
  }
  return out;
}

VerifyStats run_verify(const std::filesystem::path& in, const std::filesystem::path& out,
                       const RunConfig& cfg, SemanticBackend& backend) {
  validate(cfg);
  auto start = Clock::now();
  auto loaded = load_candidates(in);
  std::vector<RecordFailure> failures;
  add_load_errors(loaded, failures);
  auto reports = verify_records(loaded.records, cfg, backend, failures);

  write_reports(out, reports);
  write_errors(out, failures);
  backend.persist();

  VerifyStats s;
  s.records = loaded.records.size();
  s.reports = reports.size();
  s.failed = failures.size();
  s.elapsed_ms = ms_since(start);
  write_summary(out, cfg, "verify",
                {{"records", s.records}, {"reports", s.reports}, {"failed", s.failed}},
                s.elapsed_ms);
  return s;
}

MineStats run_mine(const std::filesystem::path& in, const std::filesystem::path& out,
                   const RunConfig& cfg) {
  validate(cfg);
  auto start = Clock::now();
  auto loaded = load_reports(in);
  std::vector<RecordFailure> failures;
  add_load_errors(loaded, failures);
  auto res = mine(loaded.records, cfg);
  write_pairs(out, res.pairs);
  write_errors(out, failures);

  MineStats s;
  s.reports = loaded.records.size();
  s.positives = res.buckets.positives.size();
  s.negatives_pool = res.buckets.negatives_pool.size();
  s.discarded = res.buckets.discarded.size();
  s.inconsistent = res.buckets.inconsistent.size();
  s.hard_negatives = res.hard_negatives.size();
  s.pairs = res.pairs.size();
  s.failed = failures.size();
  write_summary(out, cfg, "mine",
                {{"reports", s.reports},
                 {"positives", s.positives},
                 {"negatives_pool", s.negatives_pool},
                 {"discarded", s.discarded},
                 {"inconsistent", s.inconsistent},
                 {"hard_negatives", s.hard_negatives},
                 {"pairs", s.pairs},
                 {"failed", s.failed}},
                ms_since(start));
  return s;
}

DpoSimStats run_dpo_sim(const std::filesystem::path& in, const std::filesystem::path& out,
                        const RunConfig& cfg) {
  validate(cfg);
  auto start = Clock::now();
  auto loaded = load_pairs(in);
  std::vector<RecordFailure> failures;
  add_load_errors(loaded, failures);
  auto run = train_toy(loaded.records, cfg, cfg.dpo_steps, cfg.seed);
  write_trace(out, run.trace);
  write_errors(out, failures);

  DpoSimStats s;
  s.pairs = loaded.records.size();
  s.steps = cfg.dpo_steps;
  s.initial_loss = run.trace.front().loss;
  s.final_loss = run.trace.back().loss;
  s.failed = failures.size();
  write_summary(out, cfg, "dpo-sim",
                {{"pairs", s.pairs},
                 {"steps", s.steps},
                 {"initial_loss", s.initial_loss},
                 {"final_loss", s.final_loss},
                 {"failed", s.failed}},
                ms_since(start));
  return s;
}

EvalStats run_eval(const std::filesystem::path& predictions, const std::filesystem::path& gold,
                   const std::filesystem::path& out, const RunConfig& cfg) {
  validate(cfg);
  auto start = Clock::now();
  auto preds = load_predictions(predictions);
  auto golds = load_gold(gold);
  std::vector<RecordFailure> failures;
  add_load_errors(preds, failures);
  add_load_errors(golds, failures);

  std::vector<EvalRecord> graded;
  EvalStats s;
  s.summary = evaluate(preds.records, golds.records, graded, cfg.extra_unit_tokens);
  s.failed = failures.size();
  write_eval(out, graded);
  write_errors(out, failures);
  write_summary(out, cfg, "eval",
                {{"accuracy", s.summary.accuracy},
                 {"n", s.summary.n},
                 {"correct", s.summary.correct},
                 {"failed", s.failed}},
                ms_since(start));
  return s;
}

BenchStats run_bench(const std::filesystem::path& in, const RunConfig& cfg_in, int repeat,
                     int simulate_latency_ms) {
  RunConfig cfg = cfg_in;
  validate(cfg);
  if (repeat < 1) throw Error(ErrorKind::invalid_argument, "repeat must be >= 1");
  cfg.backend.cache_path.clear();

  std::unique_ptr<SimulatedRemote> server;
  if (simulate_latency_ms >= 0) {
    server = std::make_unique<SimulatedRemote>(simulate_latency_ms,
                                               static_cast<std::size_t>(cfg.backend.embedding_dim));
    cfg.backend.embedder = "remote";
    cfg.backend.nli = "remote";
    cfg.backend.endpoint = server->endpoint();
  }
  auto backend = SemanticBackend::from_config(cfg.backend);

  auto loaded = load_candidates(in);
  const auto& records = loaded.records;
  BenchStats s;
  s.samples = records.size();
  s.repeat = repeat;
  if (records.empty()) throw Error(ErrorKind::invalid_argument, "bench needs at least one record");
  const double n = static_cast<double>(records.size());

  std::vector<RecordFailure> failures;
  auto start = Clock::now();
  verify_records(records, cfg, *backend, failures);
  s.cold_ms_per_sample = ms_since(start) / n;
  auto after_cold = backend->cache_stats();
  s.cold_misses = after_cold.misses;

  double warm_total = 0.0;
  for (int r = 0; r < repeat; ++r) {
    start = Clock::now();
    verify_records(records, cfg, *backend, failures);
    warm_total += ms_since(start);
  }
  s.warm_ms_per_sample = warm_total / (n * repeat);
  auto after_warm = backend->cache_stats();
  s.warm_misses = after_warm.misses - after_cold.misses;
  s.warm_hits = after_warm.hits - after_cold.hits;
  s.speedup = s.warm_ms_per_sample > 0.0 ? s.cold_ms_per_sample / s.warm_ms_per_sample : 0.0;
  s.failed = failures.size() + loaded.errors.size();
  return s;
}

}  // namespace vgdpo
