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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace flsim {

struct RoundMetrics {
  std::uint64_t round = 0;
  double virtual_time = 0.0;  // cumulative seconds at round close
  double train_loss = 0.0;
  double eval_metric = 0.0;  // held-out accuracy
  std::vector<int> per_client_E;
  double mean_E = 0.0;
  double utilization = 0.0;
};

struct RunSummary {
  std::size_t rounds = 0;
  double final_train_loss = 0.0;
  double final_eval_metric = 0.0;
  double total_time = 0.0;
  double mean_round_time = 0.0;
  double mean_utilization = 0.0;
};

/// Append-only record of one run. virtual_time must strictly increase and
/// round indices must advance by one.
class MetricsLog {
 public:
  MetricsLog() = default;
  MetricsLog(std::string strategy, std::string config_fingerprint, std::string workload_fingerprint);

  void append(RoundMetrics metrics);

  const std::vector<RoundMetrics>& rounds() const noexcept { return rounds_; }
  const std::string& strategy() const noexcept { return strategy_; }
  const std::string& config_fingerprint() const noexcept { return config_fingerprint_; }
  // Fingerprint of the model, data and partition only; two runs are
  // comparable when these match.
  const std::string& workload_fingerprint() const noexcept { return workload_fingerprint_; }

  RunSummary summary() const;
  // Per-round durations (first round measured from t = 0).
  std::vector<double> round_durations() const;

 private:
  std::string strategy_;
  std::string config_fingerprint_;
  std::string workload_fingerprint_;
  std::vector<RoundMetrics> rounds_;
};

// 64-bit FNV-1a over the canonical (sorted-key, compact) JSON dump, as hex.
std::string fingerprint(const nlohmann::json& value);

inline constexpr std::string_view kCsvHeader =
    "round,virtual_time,train_loss,eval_metric,utilization,mean_E";

// Header plus one row per round; reals at 12 significant digits.
std::string csv_text(const MetricsLog& log);
void emit_csv(const MetricsLog& log, const std::string& path);

// Parses a metrics CSV back into rounds (per_client_E is not stored in CSV).
std::vector<RoundMetrics> parse_csv(std::string_view text);

inline constexpr int kSummarySchema = 1;

nlohmann::json summary_json(const MetricsLog& log);

// Rebuilds a log from the pair written by a run directory.
MetricsLog load_run(const std::string& csv_path, const std::string& summary_path);

struct ComparisonReport {
  std::string baseline_strategy;
  std::string candidate_strategy;
  std::vector<double> round_time_ratio;  // candidate / baseline per round
  double baseline_mean_time = 0.0;
  double candidate_mean_time = 0.0;
  double saving = 0.0;  // 1 - candidate_mean / baseline_mean
  double final_loss_delta = 0.0;  // candidate - baseline
  double final_eval_delta = 0.0;
};

ComparisonReport compare(const MetricsLog& baseline, const MetricsLog& candidate);
nlohmann::json to_json(const ComparisonReport& report);

// RFC-4180 field quoting.
std::string csv_field(std::string_view text);
std::string format_real(double value);

}  // namespace flsim
