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

#include "flsim/flsim.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "flsim/aggregation.hpp"
#include "flsim/error.hpp"
#include "flsim/experiment.hpp"

struct flsim_config {
  flsim::ExperimentConfig value;
};

struct flsim_log {
  flsim::MetricsLog value;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
flsim_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FLSIM_OK;
  } catch (const flsim::Error& e) {
    g_last_error = e.what();
    return e.kind() == flsim::ErrorKind::kValidation ? FLSIM_ERROR_VALIDATION : FLSIM_ERROR_RUNTIME;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FLSIM_ERROR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FLSIM_ERROR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return FLSIM_ERROR_RUNTIME;
  }
}

flsim_status invalid(const char* what) {
  g_last_error = std::string("invalid argument: ") + what;
  return FLSIM_ERROR_INVALID_ARGUMENT;
}

flsim::ParamVector vec(const double* data, size_t n) { return flsim::ParamVector(std::vector<double>(data, data + n)); }

void copy_out(const flsim::ParamVector& v, double* out) {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
}

}  // namespace

extern "C" {

const char* flsim_version(void) { return "1.0.0"; }

const char* flsim_last_error(void) { return g_last_error.c_str(); }

flsim_status flsim_config_load_file(const char* path, flsim_config** out) {
  if (!path || !out) return invalid("path and out must be non-null");
  *out = nullptr;
  return guarded([&] { *out = new flsim_config{flsim::load_config(path)}; });
}

flsim_status flsim_config_load_string(const char* json_text, const char* source_name, flsim_config** out) {
  if (!json_text || !out) return invalid("json_text and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    *out = new flsim_config{flsim::parse_config(json_text, source_name ? source_name : "<config>")};
  });
}

void flsim_config_free(flsim_config* config) { delete config; }

flsim_status flsim_config_set_strategy(flsim_config* config, const char* strategy) {
  if (!config || !strategy) return invalid("config and strategy must be non-null");
  return guarded([&] {
    const auto s = flsim::parse_strategy(strategy);
    if (s == flsim::Strategy::kOverlap && config->value.optimizer.fraction_C != 1.0) {
      throw flsim::validation_error("optimizer.fraction_C must be 1 for the overlap strategy");
    }
    config->value.strategy = s;
  });
}

flsim_status flsim_config_set_param(flsim_config* config, const char* name, double value) {
  if (!config || !name) return invalid("config and name must be non-null");
  return guarded([&] { flsim::set_param(config->value, name, value); });
}

flsim_status flsim_config_to_json(const flsim_config* config, char** out) {
  if (!config || !out) return invalid("config and out must be non-null");
  *out = nullptr;
  return guarded([&] {
    const std::string text = flsim::to_json(config->value).dump(2);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

void flsim_string_free(char* text) { delete[] text; }

flsim_status flsim_run(const flsim_config* config, flsim_log** out) {
  if (!config || !out) return invalid("config and out must be non-null");
  *out = nullptr;
  return guarded([&] { *out = new flsim_log{flsim::run_experiment(config->value)}; });
}

void flsim_log_free(flsim_log* log) { delete log; }

size_t flsim_log_round_count(const flsim_log* log) { return log ? log->value.rounds().size() : 0; }

flsim_status flsim_log_round(const flsim_log* log, size_t index, flsim_round* out) {
  if (!log || !out) return invalid("log and out must be non-null");
  if (index >= log->value.rounds().size()) return invalid("round index out of range");
  const auto& r = log->value.rounds()[index];
  *out = {r.round, r.virtual_time, r.train_loss, r.eval_metric, r.utilization, r.mean_E};
  g_last_error.clear();
  return FLSIM_OK;
}

flsim_status flsim_log_summary(const flsim_log* log, flsim_summary* out) {
  if (!log || !out) return invalid("log and out must be non-null");
  return guarded([&] {
    const auto s = log->value.summary();
    *out = {s.rounds, s.final_train_loss, s.final_eval_metric, s.total_time, s.mean_round_time, s.mean_utilization};
  });
}

flsim_status flsim_log_write(const flsim_log* log, const flsim_config* config, const char* out_dir) {
  if (!log || !config || !out_dir) return invalid("log, config and out_dir must be non-null");
  return guarded([&] { flsim::write_run(log->value, config->value, out_dir); });
}

flsim_status flsim_compare_dirs(const char* baseline_dir, const char* candidate_dir, const char* report_path,
                                flsim_comparison* out) {
  if (!baseline_dir || !candidate_dir) return invalid("run directories must be non-null");
  return guarded([&] {
    const auto r = flsim::compare_runs(baseline_dir, candidate_dir, report_path ? report_path : "");
    if (out) *out = {r.baseline_mean_time, r.candidate_mean_time, r.saving, r.final_loss_delta, r.final_eval_delta};
  });
}

flsim_status flsim_sweep(const flsim_config* config, const char* param, const double* values, size_t count,
                         const char* out_dir) {
  if (!config || !param || !out_dir || (count > 0 && !values)) return invalid("null argument");
  return guarded([&] { flsim::sweep(config->value, param, std::vector<double>(values, values + count), out_dir); });
}

flsim_status flsim_adaptive_interval(double t_train, double t_comm, int e_max, int* out) {
  if (!out) return invalid("out must be non-null");
  return guarded([&] { *out = flsim::adaptive_interval(t_train, t_comm, e_max); });
}

flsim_status flsim_compensate(const double* grad, const double* w_t, const double* w_prev, size_t n, double lambda,
                              double* out) {
  if (n > 0 && (!grad || !w_t || !w_prev || !out)) return invalid("null vector");
  return guarded([&] { copy_out(flsim::compensate(vec(grad, n), vec(w_t, n), vec(w_prev, n), lambda), out); });
}

flsim_status flsim_restore_gradient(const double* w_prev, const double* w_received, size_t n, double eta,
                                    double* out) {
  if (n > 0 && (!w_prev || !w_received || !out)) return invalid("null vector");
  return guarded([&] { copy_out(flsim::restore_gradients(vec(w_prev, n), vec(w_received, n), eta), out); });
}

}  // extern "C"
