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

// vgdpo: command-line front end over the C API.
//
// Exit codes: 0 success, 1 I/O or configuration error, 2 some records
// failed (outputs hold the rest; see <out>.errors.jsonl).

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vgdpo/vgdpo.h"

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  int workers = 1;
  bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_workers) {
  cmd->add_option("--config", f.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.sets, "Override a config key, KEY=VALUE (repeatable)");
  if (with_workers) {
    cmd->add_option("--workers", f.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  }
  cmd->add_flag("--deterministic", f.deterministic,
                "Zero timestamps and timings in outputs so reruns compare byte-identical");
}

int exit_code(vgdpo_status s) {
  if (s == VGDPO_OK) return 0;
  if (s == VGDPO_PARTIAL) return 2;
  return 1;
}

int report(vgdpo_status s) {
  if (s != VGDPO_OK) std::fprintf(stderr, "vgdpo: %s: %s\n", vgdpo_status_string(s), vgdpo_last_error());
  return exit_code(s);
}

struct Context {
  vgdpo_context* ctx = nullptr;
  ~Context() { vgdpo_context_destroy(ctx); }
};

vgdpo_status set_key(vgdpo_context* ctx, const std::string& key, const std::string& value) {
  return vgdpo_context_set(ctx, key.c_str(), value.c_str());
}

// Builds the context: config file, VGDPO_CACHE_PATH, then --set and flags.
vgdpo_status open_context(Context& c, const CommonFlags& f, bool with_workers) {
  vgdpo_status s = vgdpo_context_create(f.config.empty() ? nullptr : f.config.c_str(), &c.ctx);
  if (s != VGDPO_OK) return s;
  if (const char* cache = std::getenv("VGDPO_CACHE_PATH"); cache && *cache) {
    if ((s = set_key(c.ctx, "cache_path", cache)) != VGDPO_OK) return s;
  }
  for (const auto& kv : f.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "vgdpo: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
      return VGDPO_ERR_CONFIG;
    }
    if ((s = set_key(c.ctx, kv.substr(0, eq), kv.substr(eq + 1))) != VGDPO_OK) return s;
  }
  if (with_workers && (s = set_key(c.ctx, "workers", std::to_string(f.workers))) != VGDPO_OK) return s;
  if (f.deterministic && (s = set_key(c.ctx, "deterministic", "true")) != VGDPO_OK) return s;
  return VGDPO_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifier-guided hard-negative preference data pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vgdpo_version());

  // verify
  CommonFlags verify_flags;
  std::string verify_in, verify_out;
  double fine_fraction = -1.0;
  auto* verify = app.add_subcommand("verify", "Score candidates and write the reports file");
  verify->add_option("--in", verify_in, "Candidates file (JSONL)")->required();
  verify->add_option("--out", verify_out, "Reports file to write (JSONL)")->required();
  verify->add_option("--fine-fraction", fine_fraction,
                     "Fraction of candidates sent to the fine channel (default: config value, 1.0)")
      ->check(CLI::Range(0.0, 1.0));
  add_common(verify, verify_flags, true);

  // mine
  CommonFlags mine_flags;
  std::string mine_in, mine_out;
  auto* mine = app.add_subcommand("mine", "Filter reports and build preference pairs");
  mine->add_option("--in", mine_in, "Reports file (JSONL)")->required();
  mine->add_option("--out", mine_out, "Pairs file to write (JSONL)")->required();
  add_common(mine, mine_flags, true);

  // dpo-sim
  CommonFlags dpo_flags;
  std::string dpo_in, dpo_out;
  int dpo_steps = -1;
  auto* dpo = app.add_subcommand("dpo-sim", "Train the toy policy on a pairs file and write the trace");
  dpo->add_option("--in", dpo_in, "Pairs file (JSONL)")->required();
  dpo->add_option("--out", dpo_out, "Trace file to write (JSONL, one record per step)")->required();
  dpo->add_option("--steps", dpo_steps, "Gradient steps (default: config value, 200)")
      ->check(CLI::NonNegativeNumber);
  add_common(dpo, dpo_flags, true);

  // eval
  CommonFlags eval_flags;
  std::string eval_pred, eval_gold, eval_out;
  auto* eval = app.add_subcommand("eval", "Grade predictions against gold answers (exact match)");
  eval->add_option("--pred", eval_pred, "Predictions file {problem_id, prediction_text}")->required();
  eval->add_option("--gold", eval_gold, "Gold file {problem_id, answer}")->required();
  eval->add_option("--out", eval_out, "Per-sample graded file to write (JSONL)")->required();
  add_common(eval, eval_flags, false);

  // bench
  CommonFlags bench_flags;
  std::string bench_in;
  int repeat = 1;
  int latency_ms = -1;
  bool no_cache = false;
  auto* bench = app.add_subcommand("bench", "Time a cold and warm verification pass over a pool");
  bench->add_option("--in", bench_in, "Candidates file (JSONL)")->required();
  bench->add_option("--repeat", repeat, "Warm passes after the cold pass")
      ->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--simulate-latency-ms", latency_ms,
                    "Serve both backends from a loopback server with this per-request latency "
                    "(negative: use the configured backends)")
      ->capture_default_str();
  bench->add_flag("--no-cache", no_cache, "Disable the semantic cache (control run)");
  add_common(bench, bench_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every usage error maps onto the generic failure code.
    return app.exit(e) == 0 ? 0 : 1;
  }

  Context c;
  if (*verify) {
    if (auto s = open_context(c, verify_flags, true); s != VGDPO_OK) return report(s);
    if (fine_fraction >= 0.0) {
      if (auto s = set_key(c.ctx, "fine_fraction", std::to_string(fine_fraction)); s != VGDPO_OK) {
        return report(s);
      }
    }
    vgdpo_verify_summary sum{};
    auto s = vgdpo_verify_file(c.ctx, verify_in.c_str(), verify_out.c_str(), &sum);
    if (s == VGDPO_OK || s == VGDPO_PARTIAL) {
      std::fprintf(stderr, "verify: %zu records, %zu reports, %zu failed\n", sum.records,
                   sum.reports, sum.failed);
    }
    return report(s);
  }
  if (*mine) {
    if (auto s = open_context(c, mine_flags, true); s != VGDPO_OK) return report(s);
    vgdpo_mine_summary sum{};
    auto s = vgdpo_mine_file(c.ctx, mine_in.c_str(), mine_out.c_str(), &sum);
    if (s == VGDPO_OK || s == VGDPO_PARTIAL) {
      std::fprintf(stderr,
                   "mine: %zu reports -> %zu positives, %zu negatives pool, %zu discarded, "
                   "%zu hard negatives, %zu pairs\n",
                   sum.reports, sum.positives, sum.negatives_pool, sum.discarded,
                   sum.hard_negatives, sum.pairs);
    }
    return report(s);
  }
  if (*dpo) {
    if (auto s = open_context(c, dpo_flags, true); s != VGDPO_OK) return report(s);
    if (dpo_steps >= 0) {
      if (auto s = set_key(c.ctx, "dpo_steps", std::to_string(dpo_steps)); s != VGDPO_OK) {
        return report(s);
      }
    }
    vgdpo_dpo_summary sum{};
    auto s = vgdpo_dpo_sim_file(c.ctx, dpo_in.c_str(), dpo_out.c_str(), &sum);
    if (s == VGDPO_OK || s == VGDPO_PARTIAL) {
      std::fprintf(stderr, "dpo-sim: %zu pairs, %d steps, loss %.6f -> %.6f\n", sum.pairs,
                   sum.steps, sum.initial_loss, sum.final_loss);
    }
    return report(s);
  }
  if (*eval) {
    if (auto s = open_context(c, eval_flags, false); s != VGDPO_OK) return report(s);
    vgdpo_eval_summary sum{};
    auto s = vgdpo_eval_files(c.ctx, eval_pred.c_str(), eval_gold.c_str(), eval_out.c_str(), &sum);
    if (s == VGDPO_OK || s == VGDPO_PARTIAL) {
      std::printf("{\"accuracy\": %.17g, \"n\": %zu, \"correct\": %zu}\n", sum.accuracy, sum.n,
                  sum.correct);
    }
    return report(s);
  }
  if (*bench) {
    if (auto s = open_context(c, bench_flags, true); s != VGDPO_OK) return report(s);
    if (no_cache) {
      if (auto s = set_key(c.ctx, "cache", "false"); s != VGDPO_OK) return report(s);
    }
    vgdpo_bench_summary sum{};
    auto s = vgdpo_bench(c.ctx, bench_in.c_str(), repeat, latency_ms, &sum);
    if (s == VGDPO_OK || s == VGDPO_PARTIAL) {
      std::printf(
          "{\"samples\": %zu, \"repeat\": %d, \"cold_ms_per_sample\": %.6f, "
          "\"warm_ms_per_sample\": %.6f, \"speedup\": %.3f, \"cold_misses\": %llu, "
          "\"warm_misses\": %llu, \"warm_hits\": %llu}\n",
          sum.samples, sum.repeat, sum.cold_ms_per_sample, sum.warm_ms_per_sample, sum.speedup,
          static_cast<unsigned long long>(sum.cold_misses),
          static_cast<unsigned long long>(sum.warm_misses),
          static_cast<unsigned long long>(sum.warm_hits));
    }
    return report(s);
  }
  return 1;
}
