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

#include "flsim/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flsim/error.hpp"

namespace flsim {
namespace {

std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_real(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw validation_error("metrics CSV: bad number '" + text + "'");
  }
  if (used != text.size()) throw validation_error("metrics CSV: bad number '" + text + "'");
  return value;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

MetricsLog::MetricsLog(std::string strategy, std::string config_fingerprint,
                       std::string workload_fingerprint)
    : strategy_(std::move(strategy)),
      config_fingerprint_(std::move(config_fingerprint)),
      workload_fingerprint_(std::move(workload_fingerprint)) {}

void MetricsLog::append(RoundMetrics metrics) {
  if (!rounds_.empty()) {
    const auto& last = rounds_.back();
    if (metrics.round != last.round + 1) throw runtime_error("metrics: round index must advance by one");
    if (!(metrics.virtual_time > last.virtual_time)) {
      throw runtime_error("metrics: virtual_time must strictly increase");
    }
  }
  rounds_.push_back(std::move(metrics));
}

RunSummary MetricsLog::summary() const {
  RunSummary s;
  s.rounds = rounds_.size();
  if (rounds_.empty()) return s;
  s.final_train_loss = rounds_.back().train_loss;
  s.final_eval_metric = rounds_.back().eval_metric;
  s.total_time = rounds_.back().virtual_time;
  s.mean_round_time = s.total_time / static_cast<double>(rounds_.size());
  double util = 0.0;
  for (const auto& r : rounds_) util += r.utilization;
  s.mean_utilization = util / static_cast<double>(rounds_.size());
  return s;
}

std::vector<double> MetricsLog::round_durations() const {
  std::vector<double> out;
  out.reserve(rounds_.size());
  double previous = 0.0;
  for (const auto& r : rounds_) {
    out.push_back(r.virtual_time - previous);
    previous = r.virtual_time;
  }
  return out;
}

std::string fingerprint(const nlohmann::json& value) {
  const std::string text = value.dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_text(const MetricsLog& log) {
  std::string out(kCsvHeader);
  out += "\r\n";
  for (const auto& r : log.rounds()) {
    out += std::to_string(r.round);
    for (double v : {r.virtual_time, r.train_loss, r.eval_metric, r.utilization, r.mean_E}) {
      out += ',';
      out += csv_field(format_real(v));
    }
    out += "\r\n";
  }
  return out;
}

void emit_csv(const MetricsLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw runtime_error("cannot write '" + path + "'");
  out << csv_text(log);
  if (!out) throw runtime_error("write failed for '" + path + "'");
}

std::vector<RoundMetrics> parse_csv(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = end + 1;
  }
  if (lines.empty() || lines.front() != kCsvHeader) {
    throw validation_error("metrics CSV: missing or unexpected header");
  }
  std::vector<RoundMetrics> rounds;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_record(lines[i]);
    if (fields.size() != 6) throw validation_error("metrics CSV: expected 6 fields on line " + std::to_string(i + 1));
    RoundMetrics r;
    r.round = static_cast<std::uint64_t>(parse_real(fields[0]));
    r.virtual_time = parse_real(fields[1]);
    r.train_loss = parse_real(fields[2]);
    r.eval_metric = parse_real(fields[3]);
    r.utilization = parse_real(fields[4]);
    r.mean_E = parse_real(fields[5]);
    rounds.push_back(std::move(r));
  }
  return rounds;
}

nlohmann::json summary_json(const MetricsLog& log) {
  const RunSummary s = log.summary();
  return {
      {"schema", kSummarySchema},
      {"strategy", log.strategy()},
      {"config_fingerprint", log.config_fingerprint()},
      {"workload_fingerprint", log.workload_fingerprint()},
      {"rounds", s.rounds},
      {"final_train_loss", s.final_train_loss},
      {"final_eval_metric", s.final_eval_metric},
      {"total_time", s.total_time},
      {"mean_round_time", s.mean_round_time},
      {"mean_utilization", s.mean_utilization},
  };
}

MetricsLog load_run(const std::string& csv_path, const std::string& summary_path) {
  nlohmann::json summary;
  try {
    summary = nlohmann::json::parse(read_text(summary_path));
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("'" + summary_path + "': " + e.what());
  }
  if (!summary.is_object() || summary.value("schema", 0) != kSummarySchema) {
    throw validation_error("'" + summary_path + "': unsupported summary schema");
  }
  MetricsLog log(summary.value("strategy", ""), summary.value("config_fingerprint", ""),
                 summary.value("workload_fingerprint", ""));
  for (auto& r : parse_csv(read_text(csv_path))) log.append(std::move(r));
  return log;
}

ComparisonReport compare(const MetricsLog& baseline, const MetricsLog& candidate) {
  if (baseline.rounds().size() != candidate.rounds().size()) {
    throw validation_error("compare: runs have different round counts (" +
                           std::to_string(baseline.rounds().size()) + " vs " +
                           std::to_string(candidate.rounds().size()) + ")");
  }
  if (baseline.rounds().empty()) throw validation_error("compare: runs have no rounds");
  if (baseline.workload_fingerprint() != candidate.workload_fingerprint()) {
    throw validation_error("compare: runs use different model/dataset fingerprints");
  }
  const auto b = baseline.summary();
  const auto c = candidate.summary();
  ComparisonReport report;
  report.baseline_strategy = baseline.strategy();
  report.candidate_strategy = candidate.strategy();
  const auto bd = baseline.round_durations();
  const auto cd = candidate.round_durations();
  for (std::size_t i = 0; i < bd.size(); ++i) report.round_time_ratio.push_back(cd[i] / bd[i]);
  report.baseline_mean_time = b.mean_round_time;
  report.candidate_mean_time = c.mean_round_time;
  report.saving = 1.0 - c.mean_round_time / b.mean_round_time;
  report.final_loss_delta = c.final_train_loss - b.final_train_loss;
  report.final_eval_delta = c.final_eval_metric - b.final_eval_metric;
  return report;
}

nlohmann::json to_json(const ComparisonReport& report) {
  return {
      {"schema", kSummarySchema},
      {"baseline_strategy", report.baseline_strategy},
      {"candidate_strategy", report.candidate_strategy},
      {"baseline_mean_round_time", report.baseline_mean_time},
      {"candidate_mean_round_time", report.candidate_mean_time},
      {"saving", report.saving},
      {"saving_percent", 100.0 * report.saving},
      {"final_loss_delta", report.final_loss_delta},
      {"final_eval_delta", report.final_eval_delta},
      {"round_time_ratio", report.round_time_ratio},
  };
}

}  // namespace flsim
