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

#include "vgdpo/vgdpo.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "vgdpo/common.hpp"
#include "vgdpo/config.hpp"
#include "vgdpo/dpo.hpp"
#include "vgdpo/eval_harness.hpp"
#include "vgdpo/pipeline.hpp"
#include "vgdpo/semantic_backend.hpp"
#include "vgdpo/sim_server.hpp"

struct vgdpo_context {
  vgdpo::RunConfig cfg;
  std::unique_ptr<vgdpo::SemanticBackend> backend;  // built on first use

  vgdpo::SemanticBackend& ensure_backend() {
    if (!backend) backend = vgdpo::SemanticBackend::from_config(cfg.backend);
    return *backend;
  }
};

struct vgdpo_sim_server {
  std::unique_ptr<vgdpo::SimulatedRemote> server;
  std::string endpoint;
};

namespace {

thread_local std::string g_last_error;

vgdpo_status status_of(vgdpo::ErrorKind kind) {
  switch (kind) {
    case vgdpo::ErrorKind::invalid_argument: return VGDPO_ERR_INVALID_ARGUMENT;
    case vgdpo::ErrorKind::io: return VGDPO_ERR_IO;
    case vgdpo::ErrorKind::config: return VGDPO_ERR_CONFIG;
    case vgdpo::ErrorKind::parse: return VGDPO_ERR_PARSE;
    case vgdpo::ErrorKind::backend: return VGDPO_ERR_BACKEND;
    case vgdpo::ErrorKind::numeric: return VGDPO_ERR_NUMERIC;
    case vgdpo::ErrorKind::internal: return VGDPO_ERR_INTERNAL;
  }
  return VGDPO_ERR_INTERNAL;
}

vgdpo_status fail(vgdpo_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

template <typename F>
vgdpo_status guard(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const vgdpo::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VGDPO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VGDPO_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VGDPO_ERR_INTERNAL, "unknown exception");
  }
}

vgdpo_status partial_if(std::size_t failed) {
  if (failed == 0) return VGDPO_OK;
  g_last_error = std::to_string(failed) + " input record(s) failed; see the errors sidecar";
  return VGDPO_PARTIAL;
}

#define VGDPO_REQUIRE(cond, what) \
  if (!(cond)) return fail(VGDPO_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* vgdpo_version(void) { return "0.1.0"; }

const char* vgdpo_status_string(vgdpo_status status) {
  switch (status) {
    case VGDPO_OK: return "ok";
    case VGDPO_PARTIAL: return "partial failure";
    case VGDPO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case VGDPO_ERR_IO: return "I/O error";
    case VGDPO_ERR_CONFIG: return "configuration error";
    case VGDPO_ERR_PARSE: return "parse error";
    case VGDPO_ERR_BACKEND: return "backend error";
    case VGDPO_ERR_NUMERIC: return "numeric error";
    case VGDPO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* vgdpo_last_error(void) { return g_last_error.c_str(); }

vgdpo_status vgdpo_context_create(const char* config_path, vgdpo_context** out) {
  return guard([&] {
    VGDPO_REQUIRE(out, "out is NULL");
    *out = nullptr;
    auto ctx = std::make_unique<vgdpo_context>();
    if (config_path) ctx->cfg = vgdpo::load_config(config_path);
    *out = ctx.release();
    return VGDPO_OK;
  });
}

void vgdpo_context_destroy(vgdpo_context* ctx) { delete ctx; }

vgdpo_status vgdpo_context_set(vgdpo_context* ctx, const char* key, const char* value) {
  return guard([&] {
    VGDPO_REQUIRE(ctx && key && value, "NULL argument");
    vgdpo::set_config_value(ctx->cfg, key, value);
    ctx->backend.reset();
    return VGDPO_OK;
  });
}

vgdpo_status vgdpo_context_config_text(const vgdpo_context* ctx, char* buf, size_t cap,
                                       size_t* needed) {
  return guard([&] {
    VGDPO_REQUIRE(ctx, "ctx is NULL");
    std::string text = vgdpo::config_to_text(ctx->cfg);
    if (needed) *needed = text.size() + 1;
    if (buf && cap > 0) {
      std::size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
    return VGDPO_OK;
  });
}

vgdpo_status vgdpo_context_cache_stats(const vgdpo_context* ctx, vgdpo_cache_stats* out) {
  return guard([&] {
    VGDPO_REQUIRE(ctx && out, "NULL argument");
    *out = {0, 0, 0};
    if (ctx->backend) {
      auto s = ctx->backend->cache_stats();
      *out = {s.hits, s.misses, s.entries};
    }
    return VGDPO_OK;
  });
}

vgdpo_status vgdpo_verify_file(vgdpo_context* ctx, const char* in_path, const char* out_path,
                               vgdpo_verify_summary* summary) {
  return guard([&] {
    VGDPO_REQUIRE(ctx && in_path && out_path, "NULL argument");
    vgdpo::validate(ctx->cfg);
    auto s = vgdpo::run_verify(in_path, out_path, ctx->cfg, ctx->ensure_backend());
    if (summary) *summary = {s.records, s.reports, s.failed, s.elapsed_ms};
    return partial_if(s.failed);
  });
}

vgdpo_status vgdpo_mine_file(vgdpo_context* ctx, const char* in_path, const char* out_path,
                             vgdpo_mine_summary* summary) {
  return guard([&] {
    VGDPO_REQUIRE(ctx && in_path && out_path, "NULL argument");
    auto s = vgdpo::run_mine(in_path, out_path, ctx->cfg);
    if (summary) {
      *summary = {s.reports,      s.positives,      s.negatives_pool, s.discarded,
                  s.inconsistent, s.hard_negatives, s.pairs,          s.failed};
    }
    return partial_if(s.failed);
  });
}

vgdpo_status vgdpo_dpo_sim_file(vgdpo_context* ctx, const char* in_path, const char* out_path,
                                vgdpo_dpo_summary* summary) {
  return guard([&] {
    VGDPO_REQUIRE(ctx && in_path && out_path, "NULL argument");
    auto s = vgdpo::run_dpo_sim(in_path, out_path, ctx->cfg);
    if (summary) *summary = {s.pairs, s.steps, s.initial_loss, s.final_loss, s.failed};
    return partial_if(s.failed);
  });
}

vgdpo_status vgdpo_eval_files(vgdpo_context* ctx, const char* predictions_path,
                              const char* gold_path, const char* out_path,
                              vgdpo_eval_summary* summary) {
  return guard([&] {
    VGDPO_REQUIRE(ctx && predictions_path && gold_path && out_path, "NULL argument");
    auto s = vgdpo::run_eval(predictions_path, gold_path, out_path, ctx->cfg);
    if (summary) *summary = {s.summary.n, s.summary.correct, s.summary.accuracy, s.failed};
    return partial_if(s.failed);
  });
}

vgdpo_status vgdpo_bench(vgdpo_context* ctx, const char* in_path, int repeat,
                         int simulate_latency_ms, vgdpo_bench_summary* summary) {
  return guard([&] {
    VGDPO_REQUIRE(ctx && in_path, "NULL argument");
    auto s = vgdpo::run_bench(in_path, ctx->cfg, repeat, simulate_latency_ms);
    if (summary) {
      *summary = {s.samples,     s.repeat,      s.cold_ms_per_sample,
                  s.warm_ms_per_sample, s.speedup, s.cold_misses,
                  s.warm_misses, s.warm_hits,   s.failed};
    }
    return partial_if(s.failed);
  });
}

vgdpo_status vgdpo_dpo_loss(double pol_pos, double pol_neg, double ref_pos, double ref_neg,
                            double beta, double* out) {
  return guard([&] {
    VGDPO_REQUIRE(out, "out is NULL");
    *out = vgdpo::dpo_loss({pol_pos, pol_neg, ref_pos, ref_neg}, beta);
    return VGDPO_OK;
  });
}

vgdpo_status vgdpo_normalize_weights(const double* raw, size_t n, double lambda, double w_min,
                                     double w_max, double* out_final) {
  return guard([&] {
    VGDPO_REQUIRE(raw && out_final, "NULL argument");
    auto b = vgdpo::normalize_weights(std::span<const double>(raw, n), lambda, w_min, w_max);
    std::copy(b.final.begin(), b.final.end(), out_final);
    return VGDPO_OK;
  });
}

vgdpo_status vgdpo_grade(const char* prediction_text, const char* gold_answer, int* correct) {
  return guard([&] {
    VGDPO_REQUIRE(prediction_text && gold_answer && correct, "NULL argument");
    *correct = vgdpo::grade_prediction("", prediction_text, gold_answer).correct ? 1 : 0;
    return VGDPO_OK;
  });
}

vgdpo_status vgdpo_sim_server_start(int latency_ms, vgdpo_sim_server** out) {
  return guard([&] {
    VGDPO_REQUIRE(out, "out is NULL");
    *out = nullptr;
    auto s = std::make_unique<vgdpo_sim_server>();
    s->server = std::make_unique<vgdpo::SimulatedRemote>(latency_ms);
    s->endpoint = s->server->endpoint();
    *out = s.release();
    return VGDPO_OK;
  });
}

const char* vgdpo_sim_server_endpoint(const vgdpo_sim_server* server) {
  return server ? server->endpoint.c_str() : "";
}

void vgdpo_sim_server_stop(vgdpo_sim_server* server) { delete server; }

}  // extern "C"
