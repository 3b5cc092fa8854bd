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

#include <cmath>

#include <gtest/gtest.h>

#include "flsim/error.hpp"
#include "flsim/simulator.hpp"
#include "oracles.hpp"

namespace flsim {
namespace {

using testing::make_sim;
using testing::SimSetup;

SimSetup fedavg_setup() {
  SimSetup s;
  s.strategy = Strategy::kFedAvg;
  return s;
}

void expect_round_times(const MetricsLog& log, double expected) {
  for (double d : log.round_durations()) EXPECT_NEAR(d, expected, 1e-9);
}

TEST(Simulator, AdaptiveInterval) {
  EXPECT_EQ(adaptive_interval(1.0, 0.0, 5), 1);
  EXPECT_EQ(adaptive_interval(1.0, 3.5, 5), 4);
  EXPECT_EQ(adaptive_interval(1.0, 1e6, 5), 5);
  EXPECT_EQ(adaptive_interval(2.0, 4.0, 5), 2);
  EXPECT_THROW(adaptive_interval(0.0, 1.0, 5), Error);
  EXPECT_THROW(adaptive_interval(1.0, -1.0, 5), Error);
  EXPECT_THROW(adaptive_interval(1.0, 1.0, 0), Error);
}

TEST(Simulator, NetworkTransit) {
  NetworkModel net{0.05, 1750.0, 0.0};
  EXPECT_DOUBLE_EQ(net.transit_time(76840), 0.05 + 76840.0 / 1750.0);
  EXPECT_EQ(payload_bytes(make_model_spec(ModelKind::kMlp, 64, 10, 256)), 76840u);
  EXPECT_THROW((NetworkModel{0.0, 0.0, 0.0}.validate()), Error);
  EXPECT_THROW((NetworkModel{0.0, 1.0, 1.0}.validate()), Error);
}

TEST(Simulator, EventQueueTieOrder) {
  EventQueue q;
  q.push({5, EventKind::kRoundClose, 0, 0});
  q.push({5, EventKind::kIterComplete, 1, 0});
  q.push({5, EventKind::kIterComplete, 0, 0});
  q.push({5, EventKind::kUploadArrive, 3, 0});
  q.push({5, EventKind::kDownloadArrive, 2, 0});
  q.push({4, EventKind::kRoundClose, 9, 0});
  std::vector<std::pair<EventKind, std::size_t>> order;
  while (!q.empty()) {
    const auto e = q.pop();
    order.emplace_back(e.kind, e.client_id);
  }
  const std::vector<std::pair<EventKind, std::size_t>> expected = {
      {EventKind::kRoundClose, 9},   {EventKind::kDownloadArrive, 2}, {EventKind::kUploadArrive, 3},
      {EventKind::kIterComplete, 0}, {EventKind::kIterComplete, 1},   {EventKind::kRoundClose, 0}};
  EXPECT_EQ(order, expected);
}

TEST(Simulator, FedAvgRoundTimeIsComputePlusCommunication) {
  auto setup = fedavg_setup();
  setup.t_train = 1.0;
  setup.t_comm = 2.0;
  const auto log = run(make_sim(setup));
  expect_round_times(log, 7.0);
  for (const auto& r : log.rounds()) EXPECT_EQ(r.mean_E, 5.0);
}

TEST(Simulator, OverlapIntervalFollowsCommunication) {
  SimSetup setup;
  setup.t_comm = 3.5;
  const auto log = run(make_sim(setup));
  expect_round_times(log, 4.0);
  for (const auto& r : log.rounds()) {
    for (int e : r.per_client_E) EXPECT_EQ(e, 4);
  }
}

TEST(Simulator, OverlapClampsAtEmaxAndStalls) {
  SimSetup setup;
  setup.t_comm = 100.0;
  const auto log = run(make_sim(setup));
  expect_round_times(log, 100.0);
  for (const auto& r : log.rounds()) {
    for (int e : r.per_client_E) EXPECT_EQ(e, 5);
    EXPECT_NEAR(r.utilization, 0.05, 1e-12);
  }
}

TEST(Simulator, FreeCommunicationGivesOneIterationPerRound) {
  SimSetup setup;
  setup.t_comm = 0.0;
  setup.t_train = 0.25;
  const auto log = run(make_sim(setup));
  expect_round_times(log, 0.25);
  for (const auto& r : log.rounds()) {
    EXPECT_EQ(r.mean_E, 1.0);
    EXPECT_EQ(r.utilization, 1.0);
  }
}

TEST(Simulator, TimingAlgebraGrid) {
  for (double t : {0.3, 1.0, 2.5}) {
    for (double comm : {0.0, 0.7, 3.0, 9.9, 40.0}) {
      for (int e_max : {1, 3, 5}) {
        SimSetup setup;
        setup.t_train = t;
        setup.t_comm = comm;
        setup.rounds = 4;
        auto config = make_sim(setup);
        config.optimizer.E = e_max;
        config.optimizer.E_max = e_max;
        const int e_t = adaptive_interval(t, comm, e_max);
        expect_round_times(run(config), std::max(e_t * t, comm));
        config.strategy = Strategy::kFedAvg;
        expect_round_times(run(config), e_max * t + comm);
      }
    }
  }
}

TEST(Simulator, HeterogeneousClientsWaitForSlowest) {
  SimSetup setup;
  setup.t_comm = 3.0;
  auto config = make_sim(setup);
  config.t_train = {1.0, 1.0, 2.0, 0.5};
  // Per client: max(E_t * t, t_comm) = 3, 4, 3, 3.
  expect_round_times(run(config), 4.0);
  config.strategy = Strategy::kFedAvg;
  expect_round_times(run(config), 5 * 2.0 + 3.0);
}

TEST(Simulator, Utilization) {
  SimSetup setup;
  setup.t_comm = 4.5;
  for (double u : utilization(run(make_sim(setup)))) EXPECT_EQ(u, 1.0);

  auto fed = fedavg_setup();
  fed.t_comm = 5.0;
  for (double u : utilization(run(make_sim(fed)))) EXPECT_NEAR(u, 0.5, 1e-9);
  fed.t_comm = 0.0;
  for (double u : utilization(run(make_sim(fed)))) EXPECT_NEAR(u, 1.0, 1e-9);
  EXPECT_THROW(utilization(MetricsLog{}), Error);
}

TEST(Simulator, StalenessIsOneForOverlapZeroForFedAvg) {
  SimTrace overlap;
  run(make_sim(SimSetup{}), &overlap);
  ASSERT_FALSE(overlap.consumed_staleness.empty());
  for (int s : overlap.consumed_staleness) EXPECT_EQ(s, 1);
  SimTrace fed;
  run(make_sim(fedavg_setup()), &fed);
  ASSERT_FALSE(fed.consumed_staleness.empty());
  for (int s : fed.consumed_staleness) EXPECT_EQ(s, 0);
}

TEST(Simulator, EventsProcessedInOrder) {
  for (auto strategy : {Strategy::kOverlap, Strategy::kFedAvg}) {
    SimSetup setup;
    setup.strategy = strategy;
    setup.t_comm = 2.7;
    auto config = make_sim(setup);
    config.network.jitter_frac = 0.3;
    SimTrace trace;
    run(config, &trace);
    for (std::size_t i = 1; i < trace.events.size(); ++i) {
      const auto& a = trace.events[i - 1];
      const auto& b = trace.events[i];
      EXPECT_LE(a.time, b.time);
    }
  }
}

TEST(Simulator, JitterStaysInBounds) {
  SimSetup setup;
  setup.strategy = Strategy::kFedAvg;
  setup.t_comm = 4.0;
  auto config = make_sim(setup);
  config.network.jitter_frac = 0.25;
  const auto log = run(config);
  for (double d : log.round_durations()) {
    EXPECT_GE(d, 5.0 + 4.0 * 0.75 - 1e-9);
    EXPECT_LE(d, 5.0 + 4.0 * 1.25 + 1e-9);
  }
}

TEST(Simulator, Deterministic) {
  for (auto strategy : {Strategy::kOverlap, Strategy::kFedAvg}) {
    SimSetup setup;
    setup.strategy = strategy;
    auto config = make_sim(setup);
    config.network.jitter_frac = 0.2;
    config.optimizer.fraction_C = strategy == Strategy::kFedAvg ? 0.5 : 1.0;
    EXPECT_EQ(csv_text(run(config)), csv_text(run(config)));
  }
}

TEST(Simulator, SingleClientFedAvgIsPlainSgd) {
  auto setup = fedavg_setup();
  setup.clients = 1;
  setup.rounds = 6;
  auto config = make_sim(setup);
  config.optimizer.E = 1;
  SimTrace trace;
  run(config, &trace);
  BatchStream stream(*config.train, config.shards[0], config.optimizer.batch_size,
                     derive_seed(config.sampling_seed, SeedStream::kBatchOrder, 0));
  ParamVector w = trace.initial_weights;
  for (std::size_t r = 0; r < setup.rounds; ++r) {
    w = local_sgd_step(config.model, w, stream.next(config.model), config.optimizer.eta);
    EXPECT_EQ(w, trace.global_weights[r]);
  }
}

TEST(Simulator, OverlapWithoutCompensationIsDelayedFedAvg) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SimSetup setup;
    setup.seed = seed;
    setup.clients = 2 + seed;
    setup.t_comm = 0.8 + static_cast<double>(seed);
    auto config = make_sim(setup);
    config.optimizer.eta_decay = 0.1;
    EXPECT_LE(testing::delayed_fedavg_error(config), 1e-12);
  }
}

TEST(Simulator, FirstOverlapRoundIsNoOp) {
  SimTrace trace;
  run(make_sim(SimSetup{}), &trace);
  EXPECT_EQ(trace.global_weights[0], trace.initial_weights);
  EXPECT_NE(trace.global_weights[1], trace.initial_weights);
}

TEST(Simulator, ConfigValidation) {
  auto config = make_sim(SimSetup{});
  config.optimizer.fraction_C = 0.5;
  EXPECT_THROW(run(config), Error);
  config = make_sim(SimSetup{});
  config.t_train.pop_back();
  EXPECT_THROW(run(config), Error);
  config = make_sim(SimSetup{});
  config.rounds = 0;
  EXPECT_THROW(run(config), Error);
  config = make_sim(SimSetup{});
  EXPECT_THROW(run_fedavg(config), Error);
}

}  // namespace
}  // namespace flsim
