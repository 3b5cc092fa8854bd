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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "flsim/metrics.hpp"
#include "flsim/models.hpp"
#include "flsim/simulator.hpp"

namespace flsim {

struct DatasetConfig {
  std::string source = "synthetic";  // synthetic | idx
  std::size_t n_samples = 5000;
  std::size_t input_dim = 20;
  std::size_t class_count = 10;
  double cluster_spread = 1.0;
  std::string images;  // idx only
  std::string labels;  // idx only
  double holdout_fraction = 0.1;
};

struct PartitionConfig {
  std::size_t n_clients = 10;
  double label_alpha = 1.0;
  double size_alpha = 1.0;
};

struct ModelConfig {
  ModelKind kind = ModelKind::kLogisticRegression;
  std::size_t hidden_dim = 0;
  std::optional<LossKind> loss;
  bool bias = true;
};

struct ComputeConfig {
  double t_train = 1.0;
  std::vector<double> per_client;  // overrides t_train when non-empty
};

struct SeedConfig {
  std::uint64_t data = 1;
  std::uint64_t partition = 2;
  std::uint64_t init = 3;
  std::uint64_t sampling = 4;
  std::uint64_t jitter = 5;
};

/// Everything a run depends on. All randomness flows from the five seeds.
struct ExperimentConfig {
  Strategy strategy = Strategy::kOverlap;
  std::size_t rounds = 50;
  ModelConfig model;
  DatasetConfig dataset;
  PartitionConfig partition;
  OptimizerConfig optimizer;
  NetworkModel network;
  ComputeConfig compute;
  SeedConfig seeds;
};

/// Strict JSON schema: unknown keys and out-of-range values are validation
/// errors whose message starts with "<source>:<line>: <dotted.field>".
ExperimentConfig parse_config(std::string_view text, std::string_view source_name = "<config>");
ExperimentConfig load_config(const std::string& path);

// Fully resolved form; parse_config(to_json(c).dump()) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

// Sweepable scalar knobs: lambda, beta, eta, eta_decay, server_eta.
void set_param(ExperimentConfig& config, std::string_view name, double value);

ModelSpec resolve_model(const ExperimentConfig& config, std::size_t input_dim, std::size_t classes);
SimConfig build_simulation(const ExperimentConfig& config);
MetricsLog run_experiment(const ExperimentConfig& config, SimTrace* trace = nullptr);

inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kSummaryFile = "summary.json";

// Writes metrics.csv and summary.json (the latter embeds the resolved config).
void write_run(const MetricsLog& log, const ExperimentConfig& config, const std::string& out_dir);

// Loads two run directories, compares them and writes the report as JSON.
ComparisonReport compare_runs(const std::string& baseline_dir, const std::string& candidate_dir,
                              const std::string& report_path);

struct SweepRow {
  double value = 0.0;
  RunSummary summary;
};

/// One run per value with shared seeds, each under out_dir/<param>=<value>,
/// plus out_dir/sweep.csv keyed by the swept value. Runs execute concurrently.
std::vector<SweepRow> sweep(const ExperimentConfig& base, std::string_view param,
                            const std::vector<double>& values, const std::string& out_dir);

}  // namespace flsim
