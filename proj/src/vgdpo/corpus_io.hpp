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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vgdpo/records.hpp"

namespace vgdpo {

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

template <typename T>
struct Loaded {
  std::vector<T> records;
  std::vector<LineError> errors;
};

// Single-line codecs. Parsers throw Error(parse) naming the offending field.
std::string to_line(const CandidateRecord& r);
std::string to_line(const Report& r);
std::string to_line(const PreferencePair& r);
std::string to_line(const PredictionRecord& r);
std::string to_line(const GoldRecord& r);
std::string to_line(const EvalRecord& r);
std::string to_line(const TraceRecord& r);

CandidateRecord parse_candidate(std::string_view line);
Report parse_report(std::string_view line);
PreferencePair parse_pair(std::string_view line);
PredictionRecord parse_prediction(std::string_view line);
GoldRecord parse_gold(std::string_view line);
EvalRecord parse_eval(std::string_view line);
TraceRecord parse_trace(std::string_view line);

/// Throws Error(invalid_argument) on the first violated invariant.
void validate(const CandidateRecord& r);

// File loaders: a missing file throws Error(io); a bad line becomes a
// LineError and loading continues. Blank lines are skipped.
// Candidates without candidate_index get their ordinal within problem_id.
Loaded<CandidateRecord> load_candidates(const std::filesystem::path& path);
Loaded<Report> load_reports(const std::filesystem::path& path);
Loaded<PreferencePair> load_pairs(const std::filesystem::path& path);
Loaded<PredictionRecord> load_predictions(const std::filesystem::path& path);
Loaded<GoldRecord> load_gold(const std::filesystem::path& path);
Loaded<EvalRecord> load_eval(const std::filesystem::path& path);
Loaded<TraceRecord> load_trace(const std::filesystem::path& path);

void write_candidates(const std::filesystem::path& path, const std::vector<CandidateRecord>& rs);
void write_reports(const std::filesystem::path& path, const std::vector<Report>& rs);
void write_pairs(const std::filesystem::path& path, const std::vector<PreferencePair>& rs);
void write_eval(const std::filesystem::path& path, const std::vector<EvalRecord>& rs);
void write_trace(const std::filesystem::path& path, const std::vector<TraceRecord>& rs);

/// Writes `lines`, newline-terminated, replacing the file.
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

std::string read_file(const std::filesystem::path& path);

}  // namespace vgdpo
