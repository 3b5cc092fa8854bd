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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "flsim/error.hpp"
#include "flsim/metrics.hpp"
#include "test_util.hpp"

namespace flsim {
namespace {

using testing::read_file;
using testing::TempDir;

// Constant round time; loss decays geometrically.
MetricsLog synthetic_log(std::size_t rounds, double round_time, const std::string& strategy = "fedavg",
                         double loss_scale = 1.0) {
  MetricsLog log(strategy, "cfg", "work");
  for (std::size_t r = 0; r < rounds; ++r) {
    RoundMetrics m;
    m.round = r;
    m.virtual_time = round_time * static_cast<double>(r + 1);
    m.train_loss = loss_scale * std::exp(-0.01 * static_cast<double>(r)) / 3.0;
    m.eval_metric = 1.0 - m.train_loss / 7.0;
    m.utilization = 0.123456789012345;
    m.per_client_E = {4, 5};
    m.mean_E = 4.5;
    log.append(std::move(m));
  }
  return log;
}

TEST(Metrics, AppendEnforcesOrdering) {
  MetricsLog log("fedavg", "a", "b");
  log.append({0, 1.0, 0.5, 0.5, {}, 1.0, 1.0});
  EXPECT_THROW(log.append({2, 2.0, 0.5, 0.5, {}, 1.0, 1.0}), Error);
  EXPECT_THROW(log.append({1, 1.0, 0.5, 0.5, {}, 1.0, 1.0}), Error);
  log.append({1, 2.5, 0.5, 0.5, {}, 1.0, 1.0});
  EXPECT_EQ(log.round_durations(), (std::vector<double>{1.0, 1.5}));
}

TEST(Metrics, EmptyLogIsHeaderOnly) {
  EXPECT_EQ(csv_text(MetricsLog{}), std::string(kCsvHeader) + "\r\n");
}

TEST(Metrics, FiveHundredRoundsGiveFiveHundredOneLines) {
  TempDir dir;
  emit_csv(synthetic_log(500, 2.0), dir / "m.csv");
  const std::string text = read_file(dir / "m.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 501);
}

TEST(Metrics, CsvRoundTrip) {
  const auto log = synthetic_log(50, 1.7);
  const auto parsed = parse_csv(csv_text(log));
  ASSERT_EQ(parsed.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& a = log.rounds()[i];
    const auto& b = parsed[i];
    EXPECT_EQ(a.round, b.round);
    EXPECT_NEAR(a.virtual_time, b.virtual_time, 1e-9 * std::fabs(a.virtual_time));
    EXPECT_NEAR(a.train_loss, b.train_loss, 1e-9 * std::fabs(a.train_loss));
    EXPECT_NEAR(a.eval_metric, b.eval_metric, 1e-9);
    EXPECT_NEAR(a.utilization, b.utilization, 1e-9);
    EXPECT_EQ(a.mean_E, b.mean_E);
  }
  EXPECT_THROW(parse_csv("round,time\r\n"), Error);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\r\n1,2,3\r\n"), Error);
}

TEST(Metrics, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  const std::string row = std::string(kCsvHeader) + "\r\n\"3\",1,\"2\",0.5,1,\"4\"\r\n";
  const auto parsed = parse_csv(row);
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0].round, 3u);
  EXPECT_EQ(parsed[0].mean_E, 4.0);
}

TEST(Metrics, FingerprintIgnoresKeyOrder) {
  const auto a = nlohmann::json::parse(R"({"x": 1, "y": [1, 2], "z": {"b": 1, "a": 2}})");
  const auto b = nlohmann::json::parse(R"({"z": {"a": 2, "b": 1}, "y": [1, 2], "x": 1})");
  EXPECT_EQ(fingerprint(a), fingerprint(b));
  EXPECT_EQ(fingerprint(a), fingerprint(nlohmann::json::parse(a.dump(4))));
  EXPECT_NE(fingerprint(a), fingerprint(nlohmann::json::parse(R"({"x": 2})")));
  EXPECT_EQ(fingerprint(a).size(), 16u);
}

TEST(Metrics, SummaryJson) {
  const auto j = summary_json(synthetic_log(10, 3.0, "overlap"));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["strategy"], "overlap");
  EXPECT_EQ(j["rounds"], 10);
  EXPECT_DOUBLE_EQ(j["mean_round_time"].get<double>(), 3.0);
}

TEST(Metrics, LoadRunRoundTrip) {
  TempDir dir;
  const auto log = synthetic_log(12, 2.0, "overlap");
  emit_csv(log, dir / "m.csv");
  testing::write_file(dir.path() / "s.json", summary_json(log).dump());
  const auto loaded = load_run(dir / "m.csv", dir / "s.json");
  EXPECT_EQ(loaded.strategy(), "overlap");
  EXPECT_EQ(loaded.workload_fingerprint(), "work");
  EXPECT_EQ(loaded.rounds().size(), 12u);
  testing::write_file(dir.path() / "bad.json", R"({"schema": 99})");
  EXPECT_THROW(load_run(dir / "m.csv", dir / "bad.json"), Error);
}

TEST(Metrics, CompareIdenticalLogs) {
  const auto log = synthetic_log(20, 4.0);
  const auto r = compare(log, log);
  EXPECT_EQ(r.saving, 0.0);
  EXPECT_EQ(r.final_loss_delta, 0.0);
  EXPECT_EQ(r.final_eval_delta, 0.0);
  for (double x : r.round_time_ratio) EXPECT_EQ(x, 1.0);
}

TEST(Metrics, CompareReproducesTableSavings) {
  const auto transformer = compare(synthetic_log(10, 133.19), synthetic_log(10, 87.9, "overlap"));
  EXPECT_NEAR(100.0 * transformer.saving, 34.0, 0.05);
  const auto mlp = compare(synthetic_log(10, 31.2), synthetic_log(10, 28.85, "overlap"));
  EXPECT_NEAR(100.0 * mlp.saving, 7.53, 0.005);
}

TEST(Metrics, CompareDeltasAreAntisymmetric) {
  const auto a = synthetic_log(15, 5.0, "fedavg", 1.0);
  const auto b = synthetic_log(15, 3.0, "overlap", 0.8);
  const auto ab = compare(a, b);
  const auto ba = compare(b, a);
  EXPECT_EQ(ab.final_loss_delta, -ba.final_loss_delta);
  EXPECT_EQ(ab.final_eval_delta, -ba.final_eval_delta);
  EXPECT_GT(ab.saving, 0.0);
  EXPECT_LT(ba.saving, 0.0);
}

TEST(Metrics, CompareRejectsMismatchedRuns) {
  EXPECT_THROW(compare(synthetic_log(10, 1.0), synthetic_log(11, 1.0)), Error);
  EXPECT_THROW(compare(synthetic_log(0, 1.0), synthetic_log(0, 1.0)), Error);
  MetricsLog other("overlap", "cfg", "different");
  const auto base = synthetic_log(10, 1.0);
  for (const auto& r : base.rounds()) other.append(r);
  EXPECT_THROW(compare(synthetic_log(10, 1.0), other), Error);
}

}  // namespace
}  // namespace flsim
