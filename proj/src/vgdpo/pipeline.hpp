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

// File-to-file stages behind the CLI. Every stage writes its main output,
// `<out>.summary.json`, and `<out>.errors.jsonl` when some input line or
// record failed (a stale sidecar from an earlier run is removed).

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vgdpo/config.hpp"
#include "vgdpo/corpus_io.hpp"
#include "vgdpo/eval_harness.hpp"
#include "vgdpo/records.hpp"
#include "vgdpo/semantic_backend.hpp"

namespace vgdpo {

/// Runs fn(0..n-1) on `workers` threads. Exceptions escaping fn are
/// rethrown after all threads finish (the first by index wins).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct RecordFailure {
  std::size_t line = 0;  // 1-based input line, 0 if unknown
  std::string problem_id;
  std::string message;
};

/// Verifies in input order; failed records are reported, not emitted.
std::vector<Report> verify_records(std::span<const CandidateRecord> records,
                                   const RunConfig& cfg, SemanticBackend& backend,
                                   std::vector<RecordFailure>& failures);

struct VerifyStats {
  std::size_t records = 0;  // well-formed input lines
  std::size_t reports = 0;
  std::size_t failed = 0;   // malformed lines plus records that failed
  double elapsed_ms = 0.0;
};

VerifyStats run_verify(const std::filesystem::path& in, const std::filesystem::path& out,
                       const RunConfig& cfg, SemanticBackend& backend);

struct MineStats {
  std::size_t reports = 0;
  std::size_t positives = 0;
  std::size_t negatives_pool = 0;
  std::size_t discarded = 0;
  std::size_t inconsistent = 0;
  std::size_t hard_negatives = 0;
  std::size_t pairs = 0;
  std::size_t failed = 0;
};

MineStats run_mine(const std::filesystem::path& in, const std::filesystem::path& out,
                   const RunConfig& cfg);

struct DpoSimStats {
  std::size_t pairs = 0;
  int steps = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t failed = 0;
};

DpoSimStats run_dpo_sim(const std::filesystem::path& in, const std::filesystem::path& out,
                        const RunConfig& cfg);

struct EvalStats {
  EvalSummary summary;
  std::size_t failed = 0;
};

EvalStats run_eval(const std::filesystem::path& predictions, const std::filesystem::path& gold,
                   const std::filesystem::path& out, const RunConfig& cfg);

struct BenchStats {
  std::size_t samples = 0;
  int repeat = 0;
  double cold_ms_per_sample = 0.0;
  double warm_ms_per_sample = 0.0;  // mean over the warm passes
  double speedup = 0.0;
  std::uint64_t cold_misses = 0;
  std::uint64_t warm_misses = 0;
  std::uint64_t warm_hits = 0;
  std::size_t failed = 0;
};

/// One cold pass and `repeat` warm passes over the same in-process backend.
/// The on-disk cache is never read or written. With simulate_latency_ms >= 0
/// both backends point at a loopback SimulatedRemote with that latency.
BenchStats run_bench(const std::filesystem::path& in, const RunConfig& cfg, int repeat,
                     int simulate_latency_ms);

}  // namespace vgdpo
