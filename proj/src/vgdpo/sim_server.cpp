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

#include "vgdpo/sim_server.hpp"

#include <chrono>

#include <httplib.h>
#include <json.hpp>

#include "vgdpo/common.hpp"
#include "vgdpo/semantic_backend.hpp"

namespace vgdpo {

SimulatedRemote::SimulatedRemote(int latency_ms, std::size_t dim)
    : server_(std::make_unique<httplib::Server>()), latency_ms_(latency_ms), reply_dim_(dim) {
  auto delay = [this] {
    ++requests_;
    if (latency_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms_));
  };

  server_->Post("/embed", [this, delay](const httplib::Request& req, httplib::Response& res) {
    delay();
    if (failing_) {
      res.status = 503;
      return;
    }
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("texts")) {
      res.status = 400;
      return;
    }
    auto vectors = nlohmann::json::array();
    for (const auto& t : body["texts"]) {
      vectors.push_back(hashed_embedding(t.get<std::string>(), reply_dim_).values);
    }
    res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
  });

  server_->Post("/nli", [this, delay](const httplib::Request& req, httplib::Response& res) {
    delay();
    if (failing_) {
      res.status = 503;
      return;
    }
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("pairs")) {
      res.status = 400;
      return;
    }
    auto verdicts = nlohmann::json::array();
    for (const auto& p : body["pairs"]) {
      auto v = rule_nli(p.at(0).get<std::string>(), p.at(1).get<std::string>());
      verdicts.push_back({{"label", to_string(v.label)}, {"score", v.score}, {"tag", v.rule_tag}});
    }
    res.set_content(nlohmann::json{{"verdicts", verdicts}}.dump(), "application/json");
  });

  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw Error(ErrorKind::io, "simulated remote: cannot bind a loopback port");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

SimulatedRemote::~SimulatedRemote() { stop(); }

std::string SimulatedRemote::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

void SimulatedRemote::stop() {
  if (thread_.joinable()) {
    server_->stop();
    thread_.join();
  }
}

}  // namespace vgdpo
