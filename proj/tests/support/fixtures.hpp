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


// Small helpers shared by the unit tests and the acceptance runner.

#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vgdpo/expr.hpp"
#include "vgdpo/solution_parser.hpp"

#ifndef VGDPO_TEST_DATA_DIR
#error "VGDPO_TEST_DATA_DIR must point at tests/data"
#endif

namespace vgdpo::testing {

inline std::filesystem::path data_dir() { return VGDPO_TEST_DATA_DIR; }

inline std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parse tree as an S-expression: "(+ (* 2 x) 1)", literals as n or n/d.
inline std::string sexpr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::literal: return e.value.str();
    case ExprKind::variable: return e.name;
    case ExprKind::neg: return "(neg " + sexpr(e.args[0]) + ")";
    case ExprKind::undefined: return "undefined";
    default: break;
  }
  const char* op = "?";
  switch (e.kind) {
    case ExprKind::add: op = "+"; break;
    case ExprKind::sub: op = "-"; break;
    case ExprKind::mul: op = "*"; break;
    case ExprKind::div: op = "/"; break;
    case ExprKind::pow: op = "^"; break;
    default: break;
  }
  return std::string("(") + op + " " + sexpr(e.args[0]) + " " + sexpr(e.args[1]) + ")";
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("vgdpo-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace vgdpo::testing
