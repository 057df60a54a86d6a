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

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace vgdpo {

/// Loopback HTTP server speaking the remote backend wire format, answering
/// with the default hashed embedder and rule judge after a fixed delay per
/// request. Stands in for a model server in benchmarks and tests.
class SimulatedRemote {
 public:
  SimulatedRemote(int latency_ms, std::size_t dim = 256);
  ~SimulatedRemote();

  SimulatedRemote(const SimulatedRemote&) = delete;
  SimulatedRemote& operator=(const SimulatedRemote&) = delete;

  /// "http://127.0.0.1:<port>"
  std::string endpoint() const;
  std::uint64_t requests() const { return requests_.load(); }

  /// Makes every request fail with HTTP 503 (retry tests).
  void set_failing(bool failing) { failing_ = failing; }
  /// Replies with vectors of this dimension instead of the configured one.
  void set_reply_dim(std::size_t dim) { reply_dim_ = dim; }

  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  int latency_ms_;
  std::atomic<std::size_t> reply_dim_;
  std::atomic<bool> failing_{false};
  std::atomic<std::uint64_t> requests_{0};
};

}  // namespace vgdpo
