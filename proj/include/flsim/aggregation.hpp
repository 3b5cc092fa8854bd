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

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "flsim/models.hpp"
#include "flsim/param_vector.hpp"

namespace flsim {

/// Which momentum-correction coefficient the server applies.
///   kEq8:  v' = beta*v + g_ah + beta*(g_ah - g)
///   kAlg3: v' = beta*v + g_ah +      (g_ah - g)
enum class NagMode { kEq8, kAlg3 };

/// kAggregate restores and averages the client gradients before compensating
/// once; kPerClient compensates every restored client gradient first.
enum class CompensationMode { kAggregate, kPerClient };

std::string_view to_string(NagMode mode);
std::string_view to_string(CompensationMode mode);
NagMode parse_nag_mode(std::string_view text);
CompensationMode parse_compensation_mode(std::string_view text);

struct ServerState {
  ParamVector w_t;     // current global weights
  ParamVector w_prev;  // global weights of the preceding round
  ParamVector v;       // momentum
  double eta = 0.01;   // server learning rate
  double lambda = 0.0;
  double beta = 0.0;
  std::uint64_t round = 0;
  NagMode nag_mode = NagMode::kEq8;
};

// Round-0 state: w_prev = w_t = w0, v = 0.
ServerState make_server_state(ParamVector w0, double eta, double lambda, double beta,
                              NagMode nag_mode = NagMode::kEq8);
void validate(const ServerState& state);

struct ClientUpdate {
  std::size_t client_id = 0;
  ParamVector w_received;
  double p_k = 1.0;
  int staleness = 0;  // 1 in overlap mode, 0 in synchronous mode
};

ParamVector fedavg_aggregate(const std::vector<ClientUpdate>& updates);

// max(ceil(C*N), 1) distinct ids in ascending order.
std::vector<std::size_t> sample_clients(std::size_t n_clients, double fraction, std::uint64_t seed);

// (w_prev_global - w_received) / eta_assumed
ParamVector restore_gradients(const ParamVector& w_prev_global, const ParamVector& w_received,
                              double eta_assumed);

ParamVector weighted_gradient(const std::vector<std::pair<double, ParamVector>>& grads);

// grad + lambda * grad (.) grad (.) (w_t - w_prev)
ParamVector compensate(const ParamVector& grad, const ParamVector& w_t, const ParamVector& w_prev,
                       double lambda);

ParamVector nag_update(const ServerState& state, const ParamVector& grad_comp,
                       const ParamVector& grad_raw);

struct PhiOptions {
  // Learning rate the server divides by when restoring client gradients.
  // 1.0 when the clients' true rate is hidden from the server.
  double restore_eta = 1.0;
  CompensationMode compensation = CompensationMode::kAggregate;
};

/// One global update from stale client uploads: restore each client's
/// gradient against w_prev, weight it by p_k (renormalized over the updates
/// given), compensate toward w_t, fold into the momentum and step
/// w_{t+1} = w_t - eta * v'. The returned state has round + 1 and
/// w_prev = old w_t.
ServerState phi(const ServerState& state, const std::vector<ClientUpdate>& updates,
                 const PhiOptions& options);

// || grad(w_t) - compensate(grad(w_prev), w_t, w_prev, lambda) ||_2
double approximation_gap(const ModelSpec& spec, const ParamVector& w_t, const ParamVector& w_prev,
                         const Batch& batch, double lambda);

}  // namespace flsim
