/*
 * Copyright 2026 The vgdpo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the vgdpo pipeline: verify candidate solutions, mine
 * preference pairs, run the toy DPO simulation, grade predictions, and
 * benchmark the semantic cache.
 *
 * Every function returns a vgdpo_status. On failure, vgdpo_last_error()
 * returns a message for the calling thread, valid until that thread's next
 * call into the library. Handles are not thread-safe; use one context per
 * thread or serialize calls.
 */

#ifndef VGDPO_VGDPO_H_
#define VGDPO_VGDPO_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(VGDPO_BUILDING_LIB)
#    define VGDPO_API __declspec(dllexport)
#  else
#    define VGDPO_API __declspec(dllimport)
#  endif
#else
#  define VGDPO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vgdpo_status {
  VGDPO_OK = 0,
  /* The stage ran, but some input lines or records failed; see the
     <out>.errors.jsonl sidecar. */
  VGDPO_PARTIAL = 1,
  VGDPO_ERR_INVALID_ARGUMENT = 2,
  VGDPO_ERR_IO = 3,
  VGDPO_ERR_CONFIG = 4,
  VGDPO_ERR_PARSE = 5,
  VGDPO_ERR_BACKEND = 6,
  VGDPO_ERR_NUMERIC = 7,
  VGDPO_ERR_INTERNAL = 8
} vgdpo_status;

typedef struct vgdpo_context vgdpo_context;
typedef struct vgdpo_sim_server vgdpo_sim_server;

typedef struct vgdpo_cache_stats {
  uint64_t hits;
  uint64_t misses;
  uint64_t entries;
} vgdpo_cache_stats;

typedef struct vgdpo_verify_summary {
  size_t records;
  size_t reports;
  size_t failed;
  double elapsed_ms;
} vgdpo_verify_summary;

typedef struct vgdpo_mine_summary {
  size_t reports;
  size_t positives;
  size_t negatives_pool;
  size_t discarded;
  size_t inconsistent;
  size_t hard_negatives;
  size_t pairs;
  size_t failed;
} vgdpo_mine_summary;

typedef struct vgdpo_dpo_summary {
  size_t pairs;
  int steps;
  double initial_loss;
  double final_loss;
  size_t failed;
} vgdpo_dpo_summary;

typedef struct vgdpo_eval_summary {
  size_t n;
  size_t correct;
  double accuracy;
  size_t failed;
} vgdpo_eval_summary;

typedef struct vgdpo_bench_summary {
  size_t samples;
  int repeat;
  double cold_ms_per_sample;
  double warm_ms_per_sample;
  double speedup;
  uint64_t cold_misses;
  uint64_t warm_misses;
  uint64_t warm_hits;
  size_t failed;
} vgdpo_bench_summary;

VGDPO_API const char* vgdpo_version(void);
VGDPO_API const char* vgdpo_status_string(vgdpo_status status);
VGDPO_API const char* vgdpo_last_error(void);

/* config_path may be NULL for all defaults. */
VGDPO_API vgdpo_status vgdpo_context_create(const char* config_path, vgdpo_context** out);
VGDPO_API void vgdpo_context_destroy(vgdpo_context* ctx);

/* Overrides one config key (same names as the config file). */
VGDPO_API vgdpo_status vgdpo_context_set(vgdpo_context* ctx, const char* key, const char* value);

/* Copies the effective config text into buf (NUL-terminated, truncated to
   cap). *needed, if not NULL, receives the full length plus one. */
VGDPO_API vgdpo_status vgdpo_context_config_text(const vgdpo_context* ctx, char* buf, size_t cap,
                                                 size_t* needed);

/* Counters of the context's semantic cache since the backend was built. */
VGDPO_API vgdpo_status vgdpo_context_cache_stats(const vgdpo_context* ctx, vgdpo_cache_stats* out);

/* Stages. `summary` may be NULL. */
VGDPO_API vgdpo_status vgdpo_verify_file(vgdpo_context* ctx, const char* in_path,
                                         const char* out_path, vgdpo_verify_summary* summary);
VGDPO_API vgdpo_status vgdpo_mine_file(vgdpo_context* ctx, const char* in_path,
                                       const char* out_path, vgdpo_mine_summary* summary);
VGDPO_API vgdpo_status vgdpo_dpo_sim_file(vgdpo_context* ctx, const char* in_path,
                                          const char* out_path, vgdpo_dpo_summary* summary);
VGDPO_API vgdpo_status vgdpo_eval_files(vgdpo_context* ctx, const char* predictions_path,
                                        const char* gold_path, const char* out_path,
                                        vgdpo_eval_summary* summary);
/* simulate_latency_ms < 0 uses the configured backends. */
VGDPO_API vgdpo_status vgdpo_bench(vgdpo_context* ctx, const char* in_path, int repeat,
                                   int simulate_latency_ms, vgdpo_bench_summary* summary);

/* Scalar helpers. */
VGDPO_API vgdpo_status vgdpo_dpo_loss(double pol_pos, double pol_neg, double ref_pos,
                                      double ref_neg, double beta, double* out);
/* out_final must hold n doubles. */
VGDPO_API vgdpo_status vgdpo_normalize_weights(const double* raw, size_t n, double lambda,
                                               double w_min, double w_max, double* out_final);
VGDPO_API vgdpo_status vgdpo_grade(const char* prediction_text, const char* gold_answer,
                                   int* correct);

/* Loopback server speaking the remote backend wire format. */
VGDPO_API vgdpo_status vgdpo_sim_server_start(int latency_ms, vgdpo_sim_server** out);
VGDPO_API const char* vgdpo_sim_server_endpoint(const vgdpo_sim_server* server);
VGDPO_API void vgdpo_sim_server_stop(vgdpo_sim_server* server);

#ifdef __cplusplus
}
#endif

#endif /* VGDPO_VGDPO_H_ */
