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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vgdpo {

/// Weights of the structural dimensions in the absurdity score.
struct AbsurdityWeights {
  double logic = 0.4;
  double structure = 0.3;
  double order = 0.15;
  double sem = 0.15;
};

/// Penalty per expression comparison outcome, averaged into s_sym.
struct SymPenalties {
  double equivalent = 0.0;
  double numeric_slip = 0.3;
  double symbolic_error = 1.0;
  double incomparable = 0.5;
};

struct MiningThresholds {
  double min_confidence = 0.6;
  double wrongness_lo = 0.3;
  double wrongness_hi = 0.8;
  double min_absurdity = 0.4;
  double struct_dim_trigger = 0.5;
  double near_miss_rel = 0.10;
  double near_sem = 0.7;
  double positive_absurdity_max = 0.2;
  double trivial_floor = 0.05;
  double degenerate_ceiling = 0.95;
  int min_steps = 2;
  int per_problem_cap = 2;
};

struct BackendConfig {
  std::string embedder = "hashed";  // hashed | remote
  std::string nli = "rules";        // rules | remote
  std::string endpoint;             // http://host:port
  int timeout_ms = 5000;
  int embedding_dim = 256;
  bool cache = true;
  std::string cache_path;  // empty: in-memory only
};

/// Effective run configuration. Every field has a default; a config file
/// only lists overrides.
struct RunConfig {
  // sem, struct, order, logic, sym, ans
  std::array<double, 6> dimension_weights{1.0 / 6, 1.0 / 6, 1.0 / 6,
                                          1.0 / 6, 1.0 / 6, 1.0 / 6};
  AbsurdityWeights alpha;
  double beta = 0.1;
  double lambda = 0.3;
  double w_min = 0.5;
  double w_max = 2.0;

  double match_threshold = 0.5;
  SymPenalties sym;
  double fine_fraction = 1.0;
  MiningThresholds thresholds;
  BackendConfig backend;
  std::vector<std::string> extra_unit_tokens;

  // Toy-policy DPO simulation.
  double learning_rate = 0.1;
  int dpo_steps = 200;
  int toy_vocab = 50;
  int toy_contexts = 20;
  double init_scale = 0.0;

  std::uint64_t seed = 0;
  int workers = 1;
  bool deterministic = false;
};

/// Parses `key = value` text (blank lines and `#` comments ignored).
/// Unknown keys and out-of-range values throw Error(config).
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

/// Sets one key on an existing config, then re-validates.
void set_config_value(RunConfig& cfg, std::string_view key,
                      std::string_view value);

/// Checks every cross-field invariant; throws Error(config) on the first
/// violation.
void validate(const RunConfig& cfg);

/// Full effective config in the same `key = value` format parse_config
/// reads, one key per line, in a fixed order.
std::string config_to_text(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace vgdpo
