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

#include "vgdpo/corpus_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "vgdpo/common.hpp"

namespace vgdpo {

using nlohmann::json;

std::string_view to_string(Dimension d) { return kDimensionNames[static_cast<std::size_t>(d)]; }

Dimension dimension_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNumDimensions; ++i) {
    if (kDimensionNames[i] == s) return static_cast<Dimension>(i);
  }
  throw Error(ErrorKind::parse, "unknown dimension '" + std::string(s) + "'");
}

std::string_view to_string(Channel c) { return c == Channel::fine ? "fine" : "fast_only"; }

Channel channel_from_string(std::string_view s) {
  if (s == "fine") return Channel::fine;
  if (s == "fast_only") return Channel::fast_only;
  throw Error(ErrorKind::parse, "unknown channel '" + std::string(s) + "'");
}

namespace {

json parse_object(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::parse, "record is not a JSON object");
  return j;
}

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::parse, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::parse, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return field<T>(j, key);
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T, typename Parse>
Loaded<T> load_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  Loaded<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.records.push_back(parse(line));
    } catch (const Error& e) {
      out.errors.push_back({line_no, std::string(e.what()) + " (line " + std::to_string(line_no) + ")"});
    }
  }
  if (in.bad()) throw Error(ErrorKind::io, "read failed for '" + path.string() + "'");
  return out;
}

template <typename T>
void write_records(const std::filesystem::path& path, const std::vector<T>& rs) {
  std::vector<std::string> lines;
  lines.reserve(rs.size());
  for (const auto& r : rs) lines.push_back(to_line(r));
  write_lines(path, lines);
}

json profile_to_json(const ErrorProfile& p) {
  json s = json::object();
  for (std::size_t i = 0; i < kNumDimensions; ++i) {
    s["s_" + std::string(kDimensionNames[i])] = p.s[i];
  }
  json j{{"scores", s},
         {"wrongness", p.wrongness},
         {"absurdity", p.absurdity},
         {"w_raw", p.w_raw},
         {"primary_error", to_string(p.primary_error)},
         {"channel", to_string(p.channel)},
         {"mean_best_ref_sim", p.mean_best_ref_sim},
         {"ref_uncovered", p.ref_uncovered},
         {"pred_redundant", p.pred_redundant},
         {"diagnostics", p.diagnostics}};
  return j;
}

ErrorProfile profile_from_json(const json& j) {
  ErrorProfile p;
  auto s = field<json>(j, "scores");
  for (std::size_t i = 0; i < kNumDimensions; ++i) {
    std::string key = "s_" + std::string(kDimensionNames[i]);
    p.s[i] = field<double>(s, key.c_str());
  }
  p.wrongness = field<double>(j, "wrongness");
  p.absurdity = field<double>(j, "absurdity");
  p.w_raw = field<double>(j, "w_raw");
  p.primary_error = dimension_from_string(field<std::string>(j, "primary_error"));
  p.channel = channel_from_string(field<std::string>(j, "channel"));
  p.mean_best_ref_sim = field<double>(j, "mean_best_ref_sim");
  p.ref_uncovered = field<double>(j, "ref_uncovered");
  p.pred_redundant = field<double>(j, "pred_redundant");
  p.diagnostics = optional_field<std::vector<std::string>>(j, "diagnostics").value_or(
      std::vector<std::string>{});
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Candidates

void validate(const CandidateRecord& r) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::invalid_argument, m); };
  if (r.problem_id.empty()) bad("problem_id is empty");
  if (!r.candidate_steps && !r.candidate_text) bad("neither candidate_steps nor candidate_text present");
  if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
    bad("confidence out of range: " + format_double(r.confidence));
  }
  if (!(r.perplexity > 0.0) || !std::isfinite(r.perplexity)) {
    bad("perplexity out of range: " + format_double(r.perplexity));
  }
  if (r.logprob_policy && !(*r.logprob_policy <= 0.0)) bad("logprob_policy must be <= 0");
  if (r.logprob_ref && !(*r.logprob_ref <= 0.0)) bad("logprob_ref must be <= 0");
  if (r.candidate_index < 0) bad("candidate_index is negative");
}

std::string to_line(const CandidateRecord& r) {
  json j{{"problem_id", r.problem_id},
         {"candidate_index", r.candidate_index},
         {"question", r.question},
         {"reference_steps", r.reference_steps},
         {"reference_answer", r.reference_answer}};
  put_optional(j, "candidate_steps", r.candidate_steps);
  put_optional(j, "candidate_text", r.candidate_text);
  put_optional(j, "final_answer_raw", r.final_answer_raw);
  j["confidence"] = r.confidence;
  j["perplexity"] = r.perplexity;
  put_optional(j, "logprob_policy", r.logprob_policy);
  put_optional(j, "logprob_ref", r.logprob_ref);
  return j.dump();
}

namespace {

// Leaves candidate_index at -1 when the line does not carry one.
CandidateRecord parse_candidate_raw(std::string_view line) {
  json j = parse_object(line);
  CandidateRecord r;
  r.problem_id = field<std::string>(j, "problem_id");
  r.candidate_index = optional_field<int>(j, "candidate_index").value_or(-1);
  r.question = field<std::string>(j, "question");
  r.reference_steps = field<std::vector<std::string>>(j, "reference_steps");
  r.reference_answer = field<std::string>(j, "reference_answer");
  r.candidate_steps = optional_field<std::vector<std::string>>(j, "candidate_steps");
  r.candidate_text = optional_field<std::string>(j, "candidate_text");
  r.final_answer_raw = optional_field<std::string>(j, "final_answer_raw");
  r.confidence = field<double>(j, "confidence");
  r.perplexity = field<double>(j, "perplexity");
  r.logprob_policy = optional_field<double>(j, "logprob_policy");
  r.logprob_ref = optional_field<double>(j, "logprob_ref");
  return r;
}

void validate_loaded(const CandidateRecord& r) {
  CandidateRecord copy = r;
  if (copy.candidate_index < 0) copy.candidate_index = 0;
  try {
    validate(copy);
  } catch (const Error& e) {
    throw Error(ErrorKind::parse, e.what());
  }
}

}  // namespace

CandidateRecord parse_candidate(std::string_view line) {
  CandidateRecord r = parse_candidate_raw(line);
  validate_loaded(r);
  if (r.candidate_index < 0) r.candidate_index = 0;
  return r;
}

Loaded<CandidateRecord> load_candidates(const std::filesystem::path& path) {
  auto out = load_lines<CandidateRecord>(path, [](const std::string& line) {
    CandidateRecord r = parse_candidate_raw(line);
    validate_loaded(r);
    return r;
  });
  // Ordinals count every well-formed record of the problem, in file order.
  std::map<std::string, int> seen;
  for (auto& r : out.records) {
    int ordinal = seen[r.problem_id]++;
    if (r.candidate_index < 0) r.candidate_index = ordinal;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string to_line(const Report& r) {
  json j{{"problem_id", r.problem_id},
         {"candidate_index", r.candidate_index},
         {"confidence", r.confidence},
         {"perplexity", r.perplexity},
         {"reference_answer", r.reference_answer}};
  put_optional(j, "pred_answer", r.pred_answer);
  j["pred_steps"] = r.pred_steps;
  j["profile"] = profile_to_json(r.profile);
  return j.dump();
}

Report parse_report(std::string_view line) {
  json j = parse_object(line);
  Report r;
  r.problem_id = field<std::string>(j, "problem_id");
  r.candidate_index = field<int>(j, "candidate_index");
  r.confidence = field<double>(j, "confidence");
  r.perplexity = field<double>(j, "perplexity");
  r.reference_answer = field<std::string>(j, "reference_answer");
  r.pred_answer = optional_field<std::string>(j, "pred_answer");
  r.pred_steps = field<std::vector<std::string>>(j, "pred_steps");
  r.profile = profile_from_json(field<json>(j, "profile"));
  return r;
}

Loaded<Report> load_reports(const std::filesystem::path& path) {
  return load_lines<Report>(path, [](const std::string& l) { return parse_report(l); });
}

void write_reports(const std::filesystem::path& path, const std::vector<Report>& rs) {
  write_records(path, rs);
}

// ---------------------------------------------------------------------------
// Pairs

std::string to_line(const PreferencePair& r) {
  json j{{"problem_id", r.problem_id},
         {"chosen_index", r.chosen_index},
         {"rejected_index", r.rejected_index},
         {"w_raw", r.w_raw},
         {"tags", r.tags},
         {"context", r.context},
         {"chosen_tokens", r.chosen_tokens},
         {"rejected_tokens", r.rejected_tokens}};
  return j.dump();
}

PreferencePair parse_pair(std::string_view line) {
  json j = parse_object(line);
  PreferencePair r;
  r.problem_id = field<std::string>(j, "problem_id");
  r.chosen_index = field<int>(j, "chosen_index");
  r.rejected_index = field<int>(j, "rejected_index");
  r.w_raw = field<double>(j, "w_raw");
  r.tags = optional_field<std::vector<std::string>>(j, "tags").value_or(std::vector<std::string>{});
  r.context = field<int>(j, "context");
  r.chosen_tokens = field<std::vector<int>>(j, "chosen_tokens");
  r.rejected_tokens = field<std::vector<int>>(j, "rejected_tokens");
  if (!(r.w_raw > 0.0)) throw Error(ErrorKind::parse, "w_raw must be positive");
  return r;
}

Loaded<PreferencePair> load_pairs(const std::filesystem::path& path) {
  return load_lines<PreferencePair>(path, [](const std::string& l) { return parse_pair(l); });
}

void write_pairs(const std::filesystem::path& path, const std::vector<PreferencePair>& rs) {
  write_records(path, rs);
}

// ---------------------------------------------------------------------------
// Evaluation

std::string to_line(const PredictionRecord& r) {
  return json{{"problem_id", r.problem_id}, {"prediction_text", r.prediction_text}}.dump();
}

PredictionRecord parse_prediction(std::string_view line) {
  json j = parse_object(line);
  return {field<std::string>(j, "problem_id"), field<std::string>(j, "prediction_text")};
}

Loaded<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  return load_lines<PredictionRecord>(path, [](const std::string& l) { return parse_prediction(l); });
}

std::string to_line(const GoldRecord& r) {
  return json{{"problem_id", r.problem_id}, {"answer", r.answer}}.dump();
}

GoldRecord parse_gold(std::string_view line) {
  json j = parse_object(line);
  return {field<std::string>(j, "problem_id"), field<std::string>(j, "answer")};
}

Loaded<GoldRecord> load_gold(const std::filesystem::path& path) {
  return load_lines<GoldRecord>(path, [](const std::string& l) { return parse_gold(l); });
}

std::string to_line(const EvalRecord& r) {
  json j{{"problem_id", r.problem_id},
         {"prediction_text", r.prediction_text},
         {"gold_answer", r.gold_answer}};
  if (r.extracted_raw) {
    json e{{"raw", *r.extracted_raw}, {"canonical", r.extracted_canonical.value_or("")}};
    put_optional(e, "numeric", r.extracted_numeric);
    j["extracted"] = e;
  }
  j["correct"] = r.correct;
  j["diagnostics"] = r.diagnostics;
  return j.dump();
}

EvalRecord parse_eval(std::string_view line) {
  json j = parse_object(line);
  EvalRecord r;
  r.problem_id = field<std::string>(j, "problem_id");
  r.prediction_text = field<std::string>(j, "prediction_text");
  r.gold_answer = field<std::string>(j, "gold_answer");
  if (auto e = optional_field<json>(j, "extracted")) {
    r.extracted_raw = field<std::string>(*e, "raw");
    r.extracted_canonical = field<std::string>(*e, "canonical");
    r.extracted_numeric = optional_field<std::string>(*e, "numeric");
  }
  r.correct = field<bool>(j, "correct");
  r.diagnostics =
      optional_field<std::vector<std::string>>(j, "diagnostics").value_or(std::vector<std::string>{});
  if (r.correct && !r.extracted_raw) {
    throw Error(ErrorKind::parse, "correct record without an extracted answer");
  }
  return r;
}

Loaded<EvalRecord> load_eval(const std::filesystem::path& path) {
  return load_lines<EvalRecord>(path, [](const std::string& l) { return parse_eval(l); });
}

void write_eval(const std::filesystem::path& path, const std::vector<EvalRecord>& rs) {
  write_records(path, rs);
}

// ---------------------------------------------------------------------------
// Trace

std::string to_line(const TraceRecord& r) {
  json j{{"step", r.step},
         {"loss", r.loss},
         {"unweighted_loss", r.unweighted_loss},
         {"margins", r.margins},
         {"weights", r.weights},
         {"elapsed_ms", r.elapsed_ms}};
  return j.dump();
}

TraceRecord parse_trace(std::string_view line) {
  json j = parse_object(line);
  TraceRecord r;
  r.step = field<int>(j, "step");
  r.loss = field<double>(j, "loss");
  r.unweighted_loss = field<double>(j, "unweighted_loss");
  r.margins = field<std::vector<double>>(j, "margins");
  r.weights = field<std::vector<double>>(j, "weights");
  r.elapsed_ms = field<double>(j, "elapsed_ms");
  return r;
}

Loaded<TraceRecord> load_trace(const std::filesystem::path& path) {
  return load_lines<TraceRecord>(path, [](const std::string& l) { return parse_trace(l); });
}

void write_trace(const std::filesystem::path& path, const std::vector<TraceRecord>& rs) {
  write_records(path, rs);
}

void write_candidates(const std::filesystem::path& path, const std::vector<CandidateRecord>& rs) {
  write_records(path, rs);
}

// ---------------------------------------------------------------------------

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  for (const auto& l : lines) out << l << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vgdpo
