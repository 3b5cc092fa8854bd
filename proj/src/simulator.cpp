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

#include "flsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "flsim/error.hpp"

namespace flsim {
namespace {

class Evaluator {
 public:
  explicit Evaluator(const SimConfig& c)
      : spec_(c.model), train_(full_batch(*c.train, c.model)), test_(full_batch(*c.test, c.model)) {}

  double train_loss(const ParamVector& w) const { return loss(spec_, w, train_); }
  double eval_metric(const ParamVector& w) const { return accuracy(spec_, w, test_); }

 private:
  ModelSpec spec_;
  Batch train_;
  Batch test_;
};

class Transfers {
 public:
  Transfers(const SimConfig& c)
      : network_(c.network), bytes_(payload_bytes(c.model)), rng_(derive_seed(c.jitter_seed, SeedStream::kJitter)) {}

  Ticks next() {
    double seconds = network_.transit_time(bytes_);
    if (network_.jitter_frac > 0.0) {
      seconds *= uniform(rng_, 1.0 - network_.jitter_frac, 1.0 + network_.jitter_frac);
    }
    return to_ticks(seconds);
  }

 private:
  NetworkModel network_;
  std::size_t bytes_;
  Rng rng_;
};

std::vector<BatchStream> make_streams(const SimConfig& c) {
  std::vector<BatchStream> streams;
  streams.reserve(c.shards.size());
  for (const auto& shard : c.shards) {
    streams.emplace_back(*c.train, shard, c.optimizer.batch_size,
                         derive_seed(c.sampling_seed, SeedStream::kBatchOrder, shard.client_id));
  }
  return streams;
}

std::vector<Ticks> iteration_ticks(const SimConfig& c) {
  std::vector<Ticks> out;
  for (double t : c.t_train) out.push_back(std::max<Ticks>(1, to_ticks(t)));
  return out;
}

double mean_of(const std::vector<int>& values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (int v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

Ticks to_ticks(double seconds) { return static_cast<Ticks>(std::llround(seconds * kTicksPerSecond)); }
double to_seconds(Ticks ticks) { return static_cast<double>(ticks) / kTicksPerSecond; }

void NetworkModel::validate() const {
  if (!(latency >= 0.0) || !std::isfinite(latency)) throw validation_error("network.latency must be >= 0");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw validation_error("network.bandwidth must be > 0");
  if (!(jitter_frac >= 0.0 && jitter_frac < 1.0)) throw validation_error("network.jitter_frac must be in [0, 1)");
}

double NetworkModel::transit_time(std::size_t bytes) const {
  return latency + static_cast<double>(bytes) / bandwidth;
}

std::size_t payload_bytes(const ModelSpec& spec) { return 4 * param_count(spec); }

double OptimizerConfig::client_eta(std::uint64_t round) const {
  return eta / (1.0 + eta_decay * static_cast<double>(round));
}

double OptimizerConfig::server_rate(std::uint64_t round) const {
  const double base = server_eta > 0.0 ? server_eta : eta;
  return base / (1.0 + eta_decay * static_cast<double>(round));
}

std::string_view to_string(Strategy s) { return s == Strategy::kFedAvg ? "fedavg" : "overlap"; }

Strategy parse_strategy(std::string_view text) {
  if (text == "fedavg") return Strategy::kFedAvg;
  if (text == "overlap") return Strategy::kOverlap;
  throw validation_error("unknown strategy '" + std::string(text) + "' (expected fedavg or overlap)");
}

void SimConfig::validate() const {
  flsim::validate(model);
  if (!train || !test) throw validation_error("simulation needs train and test data");
  flsim::validate(*train);
  flsim::validate(*test);
  if (train->input_dim != model.input_dim) throw validation_error("dataset/model input_dim mismatch");
  if (shards.empty()) throw validation_error("simulation needs at least one client");
  if (t_train.size() != shards.size()) throw validation_error("need one t_train per client");
  for (double t : t_train) {
    if (!(t > 0.0) || !std::isfinite(t)) throw validation_error("t_train must be > 0");
  }
  if (rounds == 0) throw validation_error("rounds must be >= 1");
  const auto& o = optimizer;
  if (!(o.eta > 0.0) || !std::isfinite(o.eta)) throw validation_error("optimizer.eta must be > 0");
  if (!(o.eta_decay >= 0.0)) throw validation_error("optimizer.eta_decay must be >= 0");
  if (!(o.server_eta >= 0.0)) throw validation_error("optimizer.server_eta must be >= 0");
  if (!(o.lambda >= 0.0) || !std::isfinite(o.lambda)) throw validation_error("optimizer.lambda must be >= 0");
  if (!(o.beta >= 0.0 && o.beta < 1.0)) throw validation_error("optimizer.beta must be in [0, 1)");
  if (o.E < 1) throw validation_error("optimizer.E must be >= 1");
  if (o.E_max < 1) throw validation_error("optimizer.E_max must be >= 1");
  if (!(o.fraction_C > 0.0 && o.fraction_C <= 1.0)) throw validation_error("optimizer.fraction_C must be in (0, 1]");
  if (strategy == Strategy::kOverlap && o.fraction_C != 1.0) {
    throw validation_error("optimizer.fraction_C must be 1 for the overlap strategy");
  }
  network.validate();
  double total = 0.0;
  for (std::size_t k = 0; k < shards.size(); ++k) {
    if (shards[k].client_id != k) throw validation_error("shards must be ordered by client_id");
    if (!(shards[k].p_k > 0.0)) throw validation_error("every shard needs p_k > 0");
    total += shards[k].p_k;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw validation_error("shard weights must sum to 1");
}

void EventQueue::push(const SimEvent& event) { heap_.push({event, next_seq_++}); }

SimEvent EventQueue::pop() {
  SimEvent e = heap_.top().event;
  heap_.pop();
  return e;
}

bool EventQueue::Later::operator()(const Entry& a, const Entry& b) const {
  return std::make_tuple(a.event.time, static_cast<int>(a.event.kind), a.event.client_id, a.seq) >
         std::make_tuple(b.event.time, static_cast<int>(b.event.kind), b.event.client_id, b.seq);
}

int adaptive_interval(double t_train, double t_comm, int e_max) {
  if (!(t_train > 0.0) || !std::isfinite(t_train)) throw validation_error("adaptive_interval: t_train must be > 0");
  if (!(t_comm >= 0.0) || std::isnan(t_comm)) throw validation_error("adaptive_interval: t_comm must be >= 0");
  if (e_max < 1) throw validation_error("adaptive_interval: E_max must be >= 1");
  const double ratio = std::ceil(t_comm / t_train);
  if (ratio >= static_cast<double>(e_max)) return e_max;
  return std::max(1, static_cast<int>(ratio));
}

MetricsLog run_fedavg(const SimConfig& c, SimTrace* trace) {
  c.validate();
  if (c.strategy != Strategy::kFedAvg) throw validation_error("run_fedavg: config strategy is not fedavg");
  const std::size_t n = c.shards.size();
  const Evaluator evaluator(c);
  auto streams = make_streams(c);
  const auto iter_ticks = iteration_ticks(c);
  Transfers transfers(c);
  MetricsLog log(std::string(to_string(c.strategy)), c.config_fingerprint, c.workload_fingerprint);

  ParamVector global = init_params(c.model, derive_seed(c.init_seed, SeedStream::kInit));
  if (trace) trace->initial_weights = global;
  EventQueue queue;
  Ticks round_start = 0;

  for (std::uint64_t r = 0; r < c.rounds; ++r) {
    const auto chosen = sample_clients(n, c.optimizer.fraction_C,
                                       derive_seed(c.sampling_seed, SeedStream::kClientSampling, r));
    const double eta = c.optimizer.client_eta(r);
    std::vector<ParamVector> uploads(n);
    Ticks compute = 0;
    for (auto k : chosen) {
      ParamVector w = global;
      for (int e = 0; e < c.optimizer.E; ++e) w = local_sgd_step(c.model, w, streams[k].next(c.model), eta);
      uploads[k] = std::move(w);
      compute = std::max(compute, c.optimizer.E * iter_ticks[k]);
    }
    const Ticks barrier = round_start + compute;
    for (auto k : chosen) queue.push({barrier + transfers.next(), EventKind::kUploadArrive, k, r});

    std::vector<ClientUpdate> received;
    std::size_t downloads_left = 0;
    Ticks round_end = barrier;
    while (!queue.empty()) {
      const SimEvent ev = queue.pop();
      if (trace) trace->events.push_back(ev);
      if (ev.kind == EventKind::kUploadArrive) {
        received.push_back({ev.client_id, std::move(uploads[ev.client_id]), c.shards[ev.client_id].p_k, 0});
        if (received.size() == chosen.size()) {
          std::sort(received.begin(), received.end(),
                    [](const ClientUpdate& a, const ClientUpdate& b) { return a.client_id < b.client_id; });
          if (trace) {
            for (const auto& u : received) trace->consumed_staleness.push_back(u.staleness);
          }
          global = fedavg_aggregate(received);
          downloads_left = n;
          for (std::size_t k = 0; k < n; ++k) {
            queue.push({ev.time + transfers.next(), EventKind::kDownloadArrive, k, r});
          }
        }
      } else if (ev.kind == EventKind::kDownloadArrive) {
        round_end = std::max(round_end, ev.time);
        if (--downloads_left == 0) queue.push({round_end, EventKind::kRoundClose, 0, r});
      }
    }
    if (trace) trace->global_weights.push_back(global);

    const Ticks duration = round_end - round_start;
    RoundMetrics m;
    m.round = r;
    m.virtual_time = to_seconds(round_end);
    m.train_loss = evaluator.train_loss(global);
    m.eval_metric = evaluator.eval_metric(global);
    m.per_client_E.assign(n, 0);
    double util = 0.0;
    for (auto k : chosen) {
      m.per_client_E[k] = c.optimizer.E;
      util += static_cast<double>(c.optimizer.E * iter_ticks[k]) / static_cast<double>(duration);
    }
    m.utilization = util / static_cast<double>(n);
    const std::vector<int> participating(chosen.size(), c.optimizer.E);
    m.mean_E = mean_of(participating);
    log.append(std::move(m));
    round_start = round_end;
  }
  return log;
}

namespace {

struct OverlapClient {
  ParamVector local_w;
  ParamVector in_flight;  // weights captured at the last splice, on the wire
  Ticks iter_ticks = 1;
  Ticks segment_start = 0;
  std::uint64_t segment_round = 0;  // index of the global model being trained on
  int iters = 0;
  bool download_ready = false;
  bool stalled = false;
  Ticks stall_start = 0;
};

}  // namespace

MetricsLog run_overlap(const SimConfig& c, SimTrace* trace) {
  c.validate();
  if (c.strategy != Strategy::kOverlap) throw validation_error("run_overlap: config strategy is not overlap");
  const std::size_t n = c.shards.size();
  const auto& opt = c.optimizer;
  const Evaluator evaluator(c);
  auto streams = make_streams(c);
  const auto iter_ticks = iteration_ticks(c);
  Transfers transfers(c);
  MetricsLog log(std::string(to_string(c.strategy)), c.config_fingerprint, c.workload_fingerprint);

  const ParamVector w0 = init_params(c.model, derive_seed(c.init_seed, SeedStream::kInit));
  if (trace) trace->initial_weights = w0;
  ServerState server = make_server_state(w0, opt.server_rate(0), opt.lambda, opt.beta, opt.nag_mode);

  EventQueue queue;
  std::vector<OverlapClient> clients(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& cl = clients[k];
    cl.local_w = w0;
    cl.in_flight = w0;
    cl.iter_ticks = iter_ticks[k];
    queue.push({transfers.next(), EventKind::kUploadArrive, k, 0});
    queue.push({cl.iter_ticks, EventKind::kIterComplete, k, 0});
  }

  std::vector<ClientUpdate> received;
  std::uint64_t closing_round = 0;
  std::size_t spliced = 0;
  std::vector<int> round_E(n, 0);
  double round_util = 0.0;
  bool finished = false;

  auto splice = [&](std::size_t k, Ticks now) {
    auto& cl = clients[k];
    const Ticks busy = cl.iters * cl.iter_ticks;
    const Ticks idle = cl.stalled ? now - cl.stall_start : 0;
    round_E[k] = cl.iters;
    round_util += static_cast<double>(busy) / static_cast<double>(busy + idle);

    cl.in_flight = std::move(cl.local_w);
    cl.local_w = server.w_t;
    cl.segment_round = server.round;
    cl.segment_start = now;
    cl.iters = 0;
    cl.stalled = false;
    cl.download_ready = false;
    queue.push({now + transfers.next(), EventKind::kUploadArrive, k, server.round});
    queue.push({now + cl.iter_ticks, EventKind::kIterComplete, k, server.round});

    if (++spliced < n) return;
    // Every client now holds w_{r+1}: round r is closed.
    if (trace) {
      trace->events.push_back({now, EventKind::kRoundClose, 0, closing_round});
      trace->global_weights.push_back(server.w_t);
    }
    RoundMetrics m;
    m.round = closing_round;
    m.virtual_time = to_seconds(now);
    m.train_loss = evaluator.train_loss(server.w_t);
    m.eval_metric = evaluator.eval_metric(server.w_t);
    m.per_client_E = round_E;
    m.mean_E = mean_of(round_E);
    m.utilization = round_util / static_cast<double>(n);
    log.append(std::move(m));
    spliced = 0;
    round_util = 0.0;
    ++closing_round;
    finished = closing_round == c.rounds;
  };

  while (!finished && !queue.empty()) {
    const SimEvent ev = queue.pop();
    if (trace) trace->events.push_back(ev);
    auto& cl = clients[ev.client_id];
    switch (ev.kind) {
      case EventKind::kIterComplete: {
        const double eta = opt.client_eta(cl.segment_round);
        cl.local_w = local_sgd_step(c.model, cl.local_w, streams[ev.client_id].next(c.model), eta);
        ++cl.iters;
        if (cl.download_ready) {
          splice(ev.client_id, ev.time);
        } else if (cl.iters >= opt.E_max) {
          cl.stalled = true;
          cl.stall_start = ev.time;
        } else {
          queue.push({cl.segment_start + (cl.iters + 1) * cl.iter_ticks, EventKind::kIterComplete,
                      ev.client_id, cl.segment_round});
        }
        break;
      }
      case EventKind::kUploadArrive: {
        received.push_back({ev.client_id, std::move(cl.in_flight), c.shards[ev.client_id].p_k, 1});
        if (received.size() < n) break;
        std::sort(received.begin(), received.end(),
                  [](const ClientUpdate& a, const ClientUpdate& b) { return a.client_id < b.client_id; });
        if (trace) {
          for (const auto& u : received) trace->consumed_staleness.push_back(u.staleness);
        }
        const std::uint64_t r = server.round;
        server.eta = opt.server_rate(r);
        PhiOptions phi_options;
        // Round-r uploads were trained during round r - 1.
        phi_options.restore_eta = opt.client_eta(r == 0 ? 0 : r - 1);
        phi_options.compensation = opt.compensation;
        server = phi(server, received, phi_options);
        received.clear();
        for (std::size_t k = 0; k < n; ++k) {
          queue.push({ev.time + transfers.next(), EventKind::kDownloadArrive, k, r});
        }
        break;
      }
      case EventKind::kDownloadArrive: {
        cl.download_ready = true;
        if (cl.stalled) splice(ev.client_id, ev.time);
        break;
      }
      case EventKind::kRoundClose:
        break;
    }
  }
  if (!finished) throw runtime_error("overlap simulation stopped before all rounds closed");
  return log;
}

MetricsLog run(const SimConfig& config, SimTrace* trace) {
  return config.strategy == Strategy::kFedAvg ? run_fedavg(config, trace) : run_overlap(config, trace);
}

std::vector<double> utilization(const MetricsLog& log) {
  if (log.rounds().empty()) throw validation_error("utilization: empty log");
  std::vector<double> out;
  out.reserve(log.rounds().size());
  for (const auto& r : log.rounds()) out.push_back(r.utilization);
  return out;
}

}  // namespace flsim
