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

#include <cmath>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "vgdpo/common.hpp"
#include "vgdpo/semantic_backend.hpp"

namespace vgdpo {
namespace {

constexpr int kAttempts = 3;

nlohmann::json post_json(const std::string& endpoint, int timeout_ms, const std::string& route,
                         const nlohmann::json& body) {
  if (endpoint.empty()) {
    throw Error(ErrorKind::config, "remote backend selected but no endpoint configured");
  }
  httplib::Client client(endpoint);
  auto sec = timeout_ms / 1000;
  auto usec = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    auto res = client.Post(route, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
  }
  throw Error(ErrorKind::backend, "remote backend " + endpoint + route + " failed after " +
                                      std::to_string(kAttempts) + " attempts: " + last_error);
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(std::string endpoint, int timeout_ms, std::size_t dim)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms), dim_(dim) {}

std::vector<EmbeddingVector> RemoteEmbedder::embed(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  nlohmann::json body{{"texts", texts}};
  auto reply = post_json(endpoint_, timeout_ms_, "/embed", body);

  std::vector<EmbeddingVector> out;
  try {
    const auto& vectors = reply.at("vectors");
    if (vectors.size() != texts.size()) {
      throw Error(ErrorKind::backend, "remote backend " + endpoint_ + " returned " +
                                          std::to_string(vectors.size()) + " vectors for " +
                                          std::to_string(texts.size()) + " texts");
    }
    for (const auto& v : vectors) {
      EmbeddingVector e;
      e.values = v.get<std::vector<double>>();
      if (e.values.size() != dim_) {
        throw Error(ErrorKind::backend, "remote backend " + endpoint_ + " returned dimension " +
                                            std::to_string(e.values.size()) + ", expected " +
                                            std::to_string(dim_));
      }
      double sq = 0.0;
      for (double x : e.values) sq += x * x;
      e.norm = std::sqrt(sq);
      if (e.norm > 0.0 && std::abs(e.norm - 1.0) > 1e-9) {
        for (double& x : e.values) x /= e.norm;
        e.norm = 1.0;
      } else if (e.norm > 0.0) {
        e.norm = 1.0;
      }
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::backend, "remote backend " + endpoint_ + ": " + e.what());
  }
  return out;
}

RemoteNliJudge::RemoteNliJudge(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

std::vector<NliVerdict> RemoteNliJudge::judge(std::span<const NliPair> pairs) {
  if (pairs.empty()) return {};
  auto arr = nlohmann::json::array();
  for (const auto& p : pairs) arr.push_back({p.premise, p.hypothesis});
  auto reply = post_json(endpoint_, timeout_ms_, "/nli", nlohmann::json{{"pairs", arr}});

  std::vector<NliVerdict> out;
  try {
    const auto& verdicts = reply.at("verdicts");
    if (verdicts.size() != pairs.size()) {
      throw Error(ErrorKind::backend, "remote backend " + endpoint_ + " returned " +
                                          std::to_string(verdicts.size()) + " verdicts for " +
                                          std::to_string(pairs.size()) + " pairs");
    }
    for (const auto& v : verdicts) {
      NliVerdict verdict;
      verdict.label = nli_label_from_string(v.at("label").get<std::string>());
      verdict.score = v.at("score").get<double>();
      if (!(verdict.score >= 0.0 && verdict.score <= 1.0)) {
        throw Error(ErrorKind::backend, "remote backend " + endpoint_ + " returned score " +
                                            std::to_string(verdict.score) + " outside [0,1]");
      }
      verdict.rule_tag = v.value("tag", "remote:" + endpoint_);
      out.push_back(std::move(verdict));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::backend, "remote backend " + endpoint_ + ": " + e.what());
  }
  return out;
}

}  // namespace vgdpo
