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

#include "flsim/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flsim/error.hpp"
#include "flsim/random.hpp"

namespace flsim {
namespace {

void require_length(const ParamVector& v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw validation_error(std::string(what) + ": length " + std::to_string(v.size()) +
                           " does not match " + std::to_string(n));
  }
}

// p_k renormalized over the given updates.
std::vector<double> normalized_weights(const std::vector<ClientUpdate>& updates) {
  double total = 0.0;
  for (const auto& u : updates) {
    if (!(u.p_k > 0.0 && u.p_k <= 1.0)) {
      throw validation_error("client " + std::to_string(u.client_id) + ": p_k must be in (0, 1]");
    }
    total += u.p_k;
  }
  std::vector<double> weights;
  weights.reserve(updates.size());
  for (const auto& u : updates) weights.push_back(u.p_k / total);
  return weights;
}

}  // namespace

std::string_view to_string(NagMode mode) { return mode == NagMode::kEq8 ? "eq8" : "alg3"; }

std::string_view to_string(CompensationMode mode) {
  return mode == CompensationMode::kAggregate ? "aggregate" : "per-client";
}

NagMode parse_nag_mode(std::string_view text) {
  if (text == "eq8") return NagMode::kEq8;
  if (text == "alg3") return NagMode::kAlg3;
  throw validation_error("unknown nag_mode '" + std::string(text) + "' (expected eq8 or alg3)");
}

CompensationMode parse_compensation_mode(std::string_view text) {
  if (text == "aggregate") return CompensationMode::kAggregate;
  if (text == "per-client") return CompensationMode::kPerClient;
  throw validation_error("unknown compensation mode '" + std::string(text) +
                         "' (expected aggregate or per-client)");
}

ServerState make_server_state(ParamVector w0, double eta, double lambda, double beta,
                              NagMode nag_mode) {
  ServerState s;
  s.v = ParamVector::zeros(w0.size());
  s.w_prev = w0;
  s.w_t = std::move(w0);
  s.eta = eta;
  s.lambda = lambda;
  s.beta = beta;
  s.nag_mode = nag_mode;
  validate(s);
  return s;
}

void validate(const ServerState& s) {
  if (s.w_t.empty()) throw validation_error("server state: empty weights");
  if (s.w_prev.size() != s.w_t.size() || s.v.size() != s.w_t.size()) {
    throw validation_error("server state: w_t, w_prev and v must share one length");
  }
  if (!(s.eta > 0.0) || !std::isfinite(s.eta)) throw validation_error("server state: eta must be > 0");
  if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda)) {
    throw validation_error("server state: lambda must be >= 0");
  }
  if (!(s.beta >= 0.0 && s.beta < 1.0)) throw validation_error("server state: beta must be in [0, 1)");
}

ParamVector fedavg_aggregate(const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) throw validation_error("fedavg_aggregate: no updates");
  const auto weights = normalized_weights(updates);
  const std::size_t n = updates.front().w_received.size();
  std::vector<double> acc(n, 0.0);
  for (std::size_t u = 0; u < updates.size(); ++u) {
    require_length(updates[u].w_received, n, "fedavg_aggregate");
    for (std::size_t i = 0; i < n; ++i) acc[i] += weights[u] * updates[u].w_received[i];
  }
  return ParamVector(std::move(acc));
}

std::vector<std::size_t> sample_clients(std::size_t n_clients, double fraction, std::uint64_t seed) {
  if (n_clients == 0) throw validation_error("sample_clients: n_clients must be >= 1");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw validation_error("sample_clients: fraction_C must be in (0, 1]");
  }
  const auto wanted = std::max<std::size_t>(
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_clients))), 1);
  const std::size_t m = std::min(wanted, n_clients);
  std::vector<std::size_t> ids(n_clients);
  for (std::size_t i = 0; i < n_clients; ++i) ids[i] = i;
  if (m == n_clients) return ids;
  Rng rng(seed);
  shuffle(ids, rng);
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

ParamVector restore_gradients(const ParamVector& w_prev_global, const ParamVector& w_received,
                              double eta_assumed) {
  if (!(eta_assumed > 0.0) || !std::isfinite(eta_assumed)) {
    throw validation_error("restore_gradients: eta_assumed must be > 0");
  }
  require_length(w_received, w_prev_global.size(), "restore_gradients");
  return scale(subtract(w_prev_global, w_received), 1.0 / eta_assumed);
}

ParamVector weighted_gradient(const std::vector<std::pair<double, ParamVector>>& grads) {
  if (grads.empty()) throw validation_error("weighted_gradient: no gradients");
  double total = 0.0;
  for (const auto& [p, g] : grads) {
    if (!(p > 0.0)) throw validation_error("weighted_gradient: weights must be positive");
    total += p;
  }
  const std::size_t n = grads.front().second.size();
  std::vector<double> acc(n, 0.0);
  for (const auto& [p, g] : grads) {
    require_length(g, n, "weighted_gradient");
    const double weight = p / total;
    for (std::size_t i = 0; i < n; ++i) acc[i] += weight * g[i];
  }
  return ParamVector(std::move(acc));
}

ParamVector compensate(const ParamVector& grad, const ParamVector& w_t, const ParamVector& w_prev,
                       double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw validation_error("compensate: lambda must be >= 0");
  }
  require_length(w_t, grad.size(), "compensate");
  require_length(w_prev, grad.size(), "compensate");
  std::vector<double> out(grad.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = grad[i] + lambda * (grad[i] * grad[i] * (w_t[i] - w_prev[i]));
    if (!std::isfinite(out[i])) {
      throw runtime_error("compensate: non-finite value at index " + std::to_string(i));
    }
  }
  return ParamVector(std::move(out));
}

ParamVector nag_update(const ServerState& state, const ParamVector& grad_comp,
                       const ParamVector& grad_raw) {
  if (!(state.beta >= 0.0 && state.beta < 1.0)) throw validation_error("nag_update: beta must be in [0, 1)");
  require_length(grad_comp, state.v.size(), "nag_update");
  require_length(grad_raw, state.v.size(), "nag_update");
  const double correction = state.nag_mode == NagMode::kEq8 ? state.beta : 1.0;
  std::vector<double> out(state.v.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = state.beta * state.v[i] + grad_comp[i] + correction * (grad_comp[i] - grad_raw[i]);
    if (!std::isfinite(out[i])) throw runtime_error("nag_update: non-finite momentum");
  }
  return ParamVector(std::move(out));
}

ServerState phi(const ServerState& state, const std::vector<ClientUpdate>& updates,
                const PhiOptions& options) {
  validate(state);
  if (updates.empty()) throw validation_error("phi: no client updates");
  for (const auto& u : updates) {
    if (u.staleness != 0 && u.staleness != 1) {
      throw validation_error("phi: staleness must be 0 or 1");
    }
  }
  const auto weights = normalized_weights(updates);

  std::vector<std::pair<double, ParamVector>> raw;
  raw.reserve(updates.size());
  for (std::size_t u = 0; u < updates.size(); ++u) {
    raw.emplace_back(weights[u],
                     restore_gradients(state.w_prev, updates[u].w_received, options.restore_eta));
  }
  const ParamVector grad_raw = weighted_gradient(raw);

  ParamVector grad_comp;
  if (options.compensation == CompensationMode::kAggregate) {
    grad_comp = compensate(grad_raw, state.w_t, state.w_prev, state.lambda);
  } else {
    std::vector<std::pair<double, ParamVector>> comp;
    comp.reserve(raw.size());
    for (const auto& [p, g] : raw) {
      comp.emplace_back(p, compensate(g, state.w_t, state.w_prev, state.lambda));
    }
    grad_comp = weighted_gradient(comp);
  }

  ServerState next = state;
  next.v = nag_update(state, grad_comp, grad_raw);
  next.w_prev = state.w_t;
  next.w_t = axpy(state.w_t, -state.eta, next.v);
  next.round = state.round + 1;
  return next;
}

double approximation_gap(const ModelSpec& spec, const ParamVector& w_t, const ParamVector& w_prev,
                         const Batch& batch, double lambda) {
  const ParamVector truth = gradient(spec, w_t, batch);
  const ParamVector approx = compensate(gradient(spec, w_prev, batch), w_t, w_prev, lambda);
  return l2_norm(subtract(truth, approx));
}

}  // namespace flsim
