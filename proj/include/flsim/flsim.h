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

#ifndef FLSIM_FLSIM_H_
#define FLSIM_FLSIM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(FLSIM_BUILDING_LIBRARY)
#define FLSIM_API __attribute__((visibility("default")))
#else
#define FLSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum flsim_status {
  FLSIM_OK = 0,
  FLSIM_ERROR_RUNTIME = 1,
  FLSIM_ERROR_VALIDATION = 2,
  FLSIM_ERROR_INVALID_ARGUMENT = 3
} flsim_status;

typedef struct flsim_config flsim_config;
typedef struct flsim_log flsim_log;

typedef struct flsim_round {
  uint64_t round;
  double virtual_time;
  double train_loss;
  double eval_metric;
  double utilization;
  double mean_E;
} flsim_round;

typedef struct flsim_summary {
  size_t rounds;
  double final_train_loss;
  double final_eval_metric;
  double total_time;
  double mean_round_time;
  double mean_utilization;
} flsim_summary;

typedef struct flsim_comparison {
  double baseline_mean_time;
  double candidate_mean_time;
  double saving;
  double final_loss_delta;
  double final_eval_delta;
} flsim_comparison;

FLSIM_API const char* flsim_version(void);

/* Message for the last failed call on this thread; "" after a success. */
FLSIM_API const char* flsim_last_error(void);

FLSIM_API flsim_status flsim_config_load_file(const char* path, flsim_config** out);
FLSIM_API flsim_status flsim_config_load_string(const char* json_text, const char* source_name,
                                                flsim_config** out);
FLSIM_API void flsim_config_free(flsim_config* config);
/* strategy: "fedavg" or "overlap". */
FLSIM_API flsim_status flsim_config_set_strategy(flsim_config* config, const char* strategy);
/* name: lambda, beta, eta, eta_decay or server_eta. */
FLSIM_API flsim_status flsim_config_set_param(flsim_config* config, const char* name, double value);
/* Resolved config as JSON. Caller releases with flsim_string_free. */
FLSIM_API flsim_status flsim_config_to_json(const flsim_config* config, char** out);
FLSIM_API void flsim_string_free(char* text);

FLSIM_API flsim_status flsim_run(const flsim_config* config, flsim_log** out);
FLSIM_API void flsim_log_free(flsim_log* log);
FLSIM_API size_t flsim_log_round_count(const flsim_log* log);
FLSIM_API flsim_status flsim_log_round(const flsim_log* log, size_t index, flsim_round* out);
FLSIM_API flsim_status flsim_log_summary(const flsim_log* log, flsim_summary* out);
/* Writes metrics.csv and summary.json under out_dir. */
FLSIM_API flsim_status flsim_log_write(const flsim_log* log, const flsim_config* config, const char* out_dir);

/* report_path may be NULL to skip writing the JSON report. */
FLSIM_API flsim_status flsim_compare_dirs(const char* baseline_dir, const char* candidate_dir,
                                          const char* report_path, flsim_comparison* out);
FLSIM_API flsim_status flsim_sweep(const flsim_config* config, const char* param, const double* values,
                                   size_t count, const char* out_dir);

FLSIM_API flsim_status flsim_adaptive_interval(double t_train, double t_comm, int e_max, int* out);
/* out = grad + lambda * grad * grad * (w_t - w_prev), elementwise. */
FLSIM_API flsim_status flsim_compensate(const double* grad, const double* w_t, const double* w_prev, size_t n,
                                        double lambda, double* out);
/* out = (w_prev - w_received) / eta. */
FLSIM_API flsim_status flsim_restore_gradient(const double* w_prev, const double* w_received, size_t n,
                                              double eta, double* out);

#ifdef __cplusplus
}
#endif

#endif  // FLSIM_FLSIM_H_
