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

#include "vgdpo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "vgdpo/common.hpp"

namespace vgdpo {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view expected) {
  throw Error(ErrorKind::config, "config key '" + std::string(key) +
                                     "': cannot parse '" + std::string(value) +
                                     "' as " + std::string(expected));
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite real");
  }
  return out;
}

long long parse_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad_value(key, v, "an integer");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt_double(double v) { return format_double(v); }

struct Entry {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

Entry real(std::string_view key, double RunConfig::*member) {
  return {key,
          [key, member](RunConfig& c, std::string_view v) {
            c.*member = parse_double(key, v);
          },
          [member](const RunConfig& c) { return fmt_double(c.*member); }};
}

template <typename Sub>
Entry real(std::string_view key, Sub RunConfig::*sub, double Sub::*member) {
  return {key,
          [key, sub, member](RunConfig& c, std::string_view v) {
            (c.*sub).*member = parse_double(key, v);
          },
          [sub, member](const RunConfig& c) {
            return fmt_double((c.*sub).*member);
          }};
}

template <typename Sub>
Entry integer(std::string_view key, Sub RunConfig::*sub, int Sub::*member) {
  return {key,
          [key, sub, member](RunConfig& c, std::string_view v) {
            (c.*sub).*member = static_cast<int>(parse_int(key, v));
          },
          [sub, member](const RunConfig& c) {
            return std::to_string((c.*sub).*member);
          }};
}

Entry integer(std::string_view key, int RunConfig::*member) {
  return {key,
          [key, member](RunConfig& c, std::string_view v) {
            c.*member = static_cast<int>(parse_int(key, v));
          },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Entry dim_weight(std::string_view key, std::size_t index) {
  return {key,
          [key, index](RunConfig& c, std::string_view v) {
            c.dimension_weights[index] = parse_double(key, v);
          },
          [index](const RunConfig& c) {
            return fmt_double(c.dimension_weights[index]);
          }};
}

Entry backend_string(std::string_view key, std::string BackendConfig::*member) {
  return {key,
          [member](RunConfig& c, std::string_view v) {
            c.backend.*member = std::string(v);
          },
          [member](const RunConfig& c) { return c.backend.*member; }};
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back(dim_weight("w_sem", 0));
    e.push_back(dim_weight("w_struct", 1));
    e.push_back(dim_weight("w_order", 2));
    e.push_back(dim_weight("w_logic", 3));
    e.push_back(dim_weight("w_sym", 4));
    e.push_back(dim_weight("w_ans", 5));
    e.push_back(real("alpha_logic", &RunConfig::alpha, &AbsurdityWeights::logic));
    e.push_back(real("alpha_struct", &RunConfig::alpha, &AbsurdityWeights::structure));
    e.push_back(real("alpha_order", &RunConfig::alpha, &AbsurdityWeights::order));
    e.push_back(real("alpha_sem", &RunConfig::alpha, &AbsurdityWeights::sem));
    e.push_back(real("beta", &RunConfig::beta));
    e.push_back(real("lambda", &RunConfig::lambda));
    e.push_back(real("w_min", &RunConfig::w_min));
    e.push_back(real("w_max", &RunConfig::w_max));
    e.push_back(real("match_threshold", &RunConfig::match_threshold));
    e.push_back(real("penalty_equivalent", &RunConfig::sym, &SymPenalties::equivalent));
    e.push_back(real("penalty_numeric_slip", &RunConfig::sym, &SymPenalties::numeric_slip));
    e.push_back(real("penalty_symbolic_error", &RunConfig::sym, &SymPenalties::symbolic_error));
    e.push_back(real("penalty_incomparable", &RunConfig::sym, &SymPenalties::incomparable));
    e.push_back(real("fine_fraction", &RunConfig::fine_fraction));
    e.push_back(real("min_confidence", &RunConfig::thresholds, &MiningThresholds::min_confidence));
    e.push_back(real("wrongness_lo", &RunConfig::thresholds, &MiningThresholds::wrongness_lo));
    e.push_back(real("wrongness_hi", &RunConfig::thresholds, &MiningThresholds::wrongness_hi));
    e.push_back(real("min_absurdity", &RunConfig::thresholds, &MiningThresholds::min_absurdity));
    e.push_back(real("struct_dim_trigger", &RunConfig::thresholds, &MiningThresholds::struct_dim_trigger));
    e.push_back(real("near_miss_rel", &RunConfig::thresholds, &MiningThresholds::near_miss_rel));
    e.push_back(real("near_sem", &RunConfig::thresholds, &MiningThresholds::near_sem));
    e.push_back(real("positive_absurdity_max", &RunConfig::thresholds, &MiningThresholds::positive_absurdity_max));
    e.push_back(real("trivial_floor", &RunConfig::thresholds, &MiningThresholds::trivial_floor));
    e.push_back(real("degenerate_ceiling", &RunConfig::thresholds, &MiningThresholds::degenerate_ceiling));
    e.push_back(integer("min_steps", &RunConfig::thresholds, &MiningThresholds::min_steps));
    e.push_back(integer("per_problem_cap", &RunConfig::thresholds, &MiningThresholds::per_problem_cap));
    e.push_back(backend_string("embedder", &BackendConfig::embedder));
    e.push_back(backend_string("nli", &BackendConfig::nli));
    e.push_back(backend_string("endpoint", &BackendConfig::endpoint));
    e.push_back(integer("timeout_ms", &RunConfig::backend, &BackendConfig::timeout_ms));
    e.push_back(integer("embedding_dim", &RunConfig::backend, &BackendConfig::embedding_dim));
    e.push_back({"cache",
                 [](RunConfig& c, std::string_view v) {
                   c.backend.cache = parse_bool("cache", v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.backend.cache ? "true" : "false");
                 }});
    e.push_back(backend_string("cache_path", &BackendConfig::cache_path));
    e.push_back({"extra_unit_tokens",
                 [](RunConfig& c, std::string_view v) {
                   c.extra_unit_tokens.clear();
                   while (!v.empty()) {
                     auto comma = v.find(',');
                     auto item = trim(v.substr(0, comma));
                     if (!item.empty()) c.extra_unit_tokens.emplace_back(item);
                     if (comma == std::string_view::npos) break;
                     v.remove_prefix(comma + 1);
                   }
                 },
                 [](const RunConfig& c) {
                   std::string out;
                   for (const auto& t : c.extra_unit_tokens) {
                     if (!out.empty()) out += ',';
                     out += t;
                   }
                   return out;
                 }});
    e.push_back(real("learning_rate", &RunConfig::learning_rate));
    e.push_back(integer("dpo_steps", &RunConfig::dpo_steps));
    e.push_back(integer("toy_vocab", &RunConfig::toy_vocab));
    e.push_back(integer("toy_contexts", &RunConfig::toy_contexts));
    e.push_back(real("init_scale", &RunConfig::init_scale));
    e.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   auto s = parse_int("seed", v);
                   if (s < 0) bad_value("seed", v, "an unsigned integer");
                   c.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    e.push_back(integer("workers", &RunConfig::workers));
    e.push_back({"deterministic",
                 [](RunConfig& c, std::string_view v) {
                   c.deterministic = parse_bool("deterministic", v);
                 },
                 [](const RunConfig& c) {
                   return std::string(c.deterministic ? "true" : "false");
                 }});
    return e;
  }();
  return entries;
}

const Entry& find_entry(std::string_view key) {
  for (const auto& e : registry()) {
    if (e.key == key) return e;
  }
  throw Error(ErrorKind::config, "unknown config key '" + std::string(key) + "'");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::config, message);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void validate(const RunConfig& c) {
  for (double w : c.dimension_weights) {
    require(w >= 0.0, "dimension weights must be >= 0");
  }
  require(c.alpha.logic >= 0 && c.alpha.structure >= 0 && c.alpha.order >= 0 &&
              c.alpha.sem >= 0,
          "absurdity weights must be >= 0");
  require(c.beta > 0.0, "beta must be > 0");
  require(in_unit(c.lambda), "lambda must lie in [0, 1]");
  require(c.w_min <= c.w_max, "w_min exceeds w_max");
  require(c.w_min > 0.0 && c.w_min <= 1.0, "w_min must lie in (0, 1]");
  require(c.w_max >= 1.0, "w_max must be >= 1");
  require(in_unit(c.match_threshold), "match_threshold must lie in [0, 1]");
  require(in_unit(c.sym.equivalent) && in_unit(c.sym.numeric_slip) &&
              in_unit(c.sym.symbolic_error) && in_unit(c.sym.incomparable),
          "s_sym penalties must lie in [0, 1]");
  require(in_unit(c.fine_fraction), "fine_fraction must lie in [0, 1]");

  const auto& t = c.thresholds;
  require(t.wrongness_lo < t.wrongness_hi, "wrongness_lo must be < wrongness_hi");
  for (double v : {t.min_confidence, t.wrongness_lo, t.wrongness_hi,
                   t.min_absurdity, t.struct_dim_trigger, t.near_sem,
                   t.positive_absurdity_max, t.trivial_floor,
                   t.degenerate_ceiling}) {
    require(in_unit(v), "mining thresholds must lie in [0, 1]");
  }
  require(t.near_miss_rel > 0.0, "near_miss_rel must be > 0");
  require(t.trivial_floor < t.degenerate_ceiling,
          "trivial_floor must be < degenerate_ceiling");
  require(t.min_steps >= 0, "min_steps must be >= 0");
  require(t.per_problem_cap >= 1, "per_problem_cap must be >= 1");

  const auto& b = c.backend;
  require(b.embedder == "hashed" || b.embedder == "remote",
          "embedder must be 'hashed' or 'remote'");
  require(b.nli == "rules" || b.nli == "remote", "nli must be 'rules' or 'remote'");
  require(!((b.embedder == "remote" || b.nli == "remote") && b.endpoint.empty()),
          "remote backend requires an endpoint");
  require(b.timeout_ms > 0, "timeout_ms must be > 0");
  require(b.embedding_dim > 0, "embedding_dim must be > 0");

  require(c.learning_rate > 0.0, "learning_rate must be > 0");
  require(c.dpo_steps >= 0, "dpo_steps must be >= 0");
  require(c.toy_vocab >= 1 && c.toy_vocab <= 50, "toy_vocab must lie in [1, 50]");
  require(c.toy_contexts >= 1 && c.toy_contexts <= 20,
          "toy_contexts must lie in [1, 20]");
  require(c.init_scale >= 0.0, "init_scale must be >= 0");
  require(c.workers >= 1, "workers must be >= 1");
}

void set_config_value(RunConfig& cfg, std::string_view key,
                      std::string_view value) {
  RunConfig next = cfg;
  find_entry(trim(key)).set(next, trim(value));
  validate(next);
  cfg = std::move(next);
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::config, "config line " + std::to_string(line_no) +
                                         ": expected 'key = value'");
    }
    try {
      find_entry(trim(line.substr(0, eq))).set(cfg, trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorKind::config,
                  "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::io, "cannot open config file '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : registry()) {
    out += e.key;
    out += " = ";
    out += e.get(cfg);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : registry()) keys.emplace_back(e.key);
  return keys;
}

}  // namespace vgdpo
