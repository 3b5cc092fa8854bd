// Copyright 2026 The flsim Authors. All Rights Reserved.
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

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "flsim/aggregation.hpp"
#include "flsim/data.hpp"
#include "flsim/metrics.hpp"
#include "flsim/models.hpp"
#include "flsim/random.hpp"

namespace flsim {

/// Virtual time in integer nanosecond ticks; all schedule arithmetic is exact.
using Ticks = std::int64_t;
inline constexpr double kTicksPerSecond = 1e9;

Ticks to_ticks(double seconds);
double to_seconds(Ticks ticks);

struct NetworkModel {
  double latency = 0.0;      // seconds
  double bandwidth = 1e12;   // bytes per second
  double jitter_frac = 0.0;  // transit scaled by a factor in [1 - j, 1 + j]

  void validate() const;
  // latency + bytes / bandwidth, before jitter.
  double transit_time(std::size_t bytes) const;
};

// Payload of one model transfer: 32-bit floats on the wire.
std::size_t payload_bytes(const ModelSpec& spec);

struct OptimizerConfig {
  double eta = 0.05;
  double eta_decay = 0.0;  // eta_t = eta / (1 + eta_decay * t)
  double server_eta = 0.0;  // 0 means: same as eta
  double lambda = 0.0;
  double beta = 0.0;
  NagMode nag_mode = NagMode::kEq8;
  CompensationMode compensation = CompensationMode::kAggregate;
  int E = 5;      // fixed interval (fedavg)
  int E_max = 5;  // adaptive interval ceiling (overlap)
  double fraction_C = 1.0;
  std::size_t batch_size = 32;  // 0 = full shard

  double client_eta(std::uint64_t round) const;
  double server_rate(std::uint64_t round) const;
};

enum class Strategy { kFedAvg, kOverlap };
std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct SimConfig {
  Strategy strategy = Strategy::kOverlap;
  ModelSpec model;
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> test;
  std::vector<ClientShard> shards;
  OptimizerConfig optimizer;
  NetworkModel network;
  std::vector<double> t_train;  // seconds per local iteration, one per client
  std::size_t rounds = 1;
  std::uint64_t init_seed = 0;
  std::uint64_t sampling_seed = 0;
  std::uint64_t jitter_seed = 0;
  std::string config_fingerprint;
  std::string workload_fingerprint;

  void validate() const;
};

enum class EventKind : int {
  // Tie order at equal virtual time.
  kDownloadArrive = 0,
  kUploadArrive = 1,
  kIterComplete = 2,
  kRoundClose = 3,
};

struct SimEvent {
  Ticks time = 0;
  EventKind kind = EventKind::kIterComplete;
  std::size_t client_id = 0;
  std::uint64_t round = 0;
};

/// Min-queue over (time, kind, client_id, insertion order).
class EventQueue {
 public:
  void push(const SimEvent& event);
  SimEvent pop();
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Entry {
    SimEvent event;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const;
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

/// Optional introspection of a run.
struct SimTrace {
  std::vector<SimEvent> events;               // in processing order
  std::vector<int> consumed_staleness;        // every update handed to the server
  std::vector<ParamVector> global_weights;    // after each round: w_1, w_2, ...
  ParamVector initial_weights;                // w_0
};

// min(E_max, max(1, ceil(t_comm / t_train)))
int adaptive_interval(double t_train, double t_comm, int e_max);

/// Synchronous schedule: sampled clients run exactly E iterations, the server
/// waits for every upload, averages and broadcasts. Round time is
/// max(E * t_train) + max upload + max download.
MetricsLog run_fedavg(const SimConfig& config, SimTrace* trace = nullptr);

/// Overlapped schedule: each client trains continuously while its
/// communication track uploads the weights captured at the last splice and
/// fetches the next global model. The server applies phi once all uploads of
/// the round have arrived; a client splices the new global model in at its
/// first iteration boundary at or after the download lands, or immediately
/// if it already ran E_max iterations and is idling. Updates reaching the
/// server are therefore exactly one round stale; in round 0 clients upload
/// the untrained w0, which makes the first update a no-op.
MetricsLog run_overlap(const SimConfig& config, SimTrace* trace = nullptr);

MetricsLog run(const SimConfig& config, SimTrace* trace = nullptr);

// Per-round compute utilization of a finished run.
std::vector<double> utilization(const MetricsLog& log);

}  // namespace flsim
