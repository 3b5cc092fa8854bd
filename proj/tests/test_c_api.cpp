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

#include <cstring>
#include <filesystem>
#include <string>
#include <unistd.h>

#include <gtest/gtest.h>

#include "flsim/flsim.h"

namespace {

namespace fs = std::filesystem;

const char* kConfig = R"({
  "strategy": "fedavg",
  "rounds": 4,
  "model": { "kind": "logistic-regression" },
  "dataset": { "n_samples": 200, "input_dim": 3, "class_count": 2 },
  "partition": { "n_clients": 2 },
  "network": { "latency": 1.0 },
  "compute": { "t_train": 1.0 }
})";

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("flsim_capi_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(CApi, RunAndInspect) {
  flsim_config* config = nullptr;
  ASSERT_EQ(flsim_config_load_string(kConfig, "inline", &config), FLSIM_OK) << flsim_last_error();
  flsim_log* log = nullptr;
  ASSERT_EQ(flsim_run(config, &log), FLSIM_OK) << flsim_last_error();
  ASSERT_EQ(flsim_log_round_count(log), 4u);
  flsim_round r{};
  ASSERT_EQ(flsim_log_round(log, 3, &r), FLSIM_OK);
  EXPECT_EQ(r.round, 3u);
  EXPECT_NEAR(r.virtual_time, 4 * 7.0, 1e-9);
  EXPECT_EQ(flsim_log_round(log, 4, &r), FLSIM_ERROR_INVALID_ARGUMENT);
  flsim_summary s{};
  ASSERT_EQ(flsim_log_summary(log, &s), FLSIM_OK);
  EXPECT_NEAR(s.mean_round_time, 7.0, 1e-9);
  EXPECT_NEAR(s.mean_utilization, 5.0 / 7.0, 1e-9);

  const auto dir = temp_dir("run");
  ASSERT_EQ(flsim_log_write(log, config, dir.string().c_str()), FLSIM_OK) << flsim_last_error();
  EXPECT_TRUE(fs::exists(dir / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "summary.json"));

  flsim_comparison cmp{};
  ASSERT_EQ(flsim_compare_dirs(dir.string().c_str(), dir.string().c_str(), nullptr, &cmp), FLSIM_OK);
  EXPECT_EQ(cmp.saving, 0.0);
  fs::remove_all(dir);
  flsim_log_free(log);
  flsim_config_free(config);
}

TEST(CApi, ValidationErrors) {
  flsim_config* config = nullptr;
  std::string bad = kConfig;
  bad.replace(bad.find("\"rounds\": 4"), 11, "\"rounds\": -4");
  EXPECT_EQ(flsim_config_load_string(bad.c_str(), "bad.json", &config), FLSIM_ERROR_VALIDATION);
  EXPECT_EQ(config, nullptr);
  EXPECT_NE(std::string(flsim_last_error()).find("bad.json:3: rounds"), std::string::npos) << flsim_last_error();

  ASSERT_EQ(flsim_config_load_string(kConfig, nullptr, &config), FLSIM_OK);
  EXPECT_STREQ(flsim_last_error(), "");
  EXPECT_EQ(flsim_config_set_param(config, "lambda", -1.0), FLSIM_ERROR_VALIDATION);
  EXPECT_NE(std::string(flsim_last_error()).find("optimizer.lambda"), std::string::npos);
  EXPECT_EQ(flsim_config_set_strategy(config, "gossip"), FLSIM_ERROR_VALIDATION);
  EXPECT_EQ(flsim_config_set_strategy(config, "overlap"), FLSIM_OK);
  EXPECT_EQ(flsim_config_load_file("/nonexistent.json", &config), FLSIM_ERROR_VALIDATION);
  EXPECT_EQ(flsim_run(nullptr, nullptr), FLSIM_ERROR_INVALID_ARGUMENT);
  flsim_config_free(config);
}

TEST(CApi, ConfigJson) {
  flsim_config* config = nullptr;
  ASSERT_EQ(flsim_config_load_string(kConfig, "inline", &config), FLSIM_OK);
  ASSERT_EQ(flsim_config_set_param(config, "beta", 0.25), FLSIM_OK);
  char* text = nullptr;
  ASSERT_EQ(flsim_config_to_json(config, &text), FLSIM_OK);
  EXPECT_NE(std::string(text).find("\"beta\": 0.25"), std::string::npos);
  flsim_config* again = nullptr;
  EXPECT_EQ(flsim_config_load_string(text, "echo", &again), FLSIM_OK) << flsim_last_error();
  flsim_string_free(text);
  flsim_config_free(again);
  flsim_config_free(config);
}

TEST(CApi, MathHelpers) {
  int e = 0;
  ASSERT_EQ(flsim_adaptive_interval(1.0, 3.5, 5, &e), FLSIM_OK);
  EXPECT_EQ(e, 4);
  EXPECT_EQ(flsim_adaptive_interval(0.0, 3.5, 5, &e), FLSIM_ERROR_VALIDATION);

  const double g[] = {1.0};
  const double w_t[] = {0.8};
  const double w_prev[] = {1.0};
  double out[1];
  ASSERT_EQ(flsim_compensate(g, w_t, w_prev, 1, 1.0, out), FLSIM_OK);
  EXPECT_NEAR(out[0], 0.8, 1e-12);

  const double recv[] = {0.9, 1.8};
  const double prev[] = {1.0, 2.0};
  double restored[2];
  ASSERT_EQ(flsim_restore_gradient(prev, recv, 2, 0.1, restored), FLSIM_OK);
  EXPECT_NEAR(restored[0], 1.0, 1e-12);
  EXPECT_NEAR(restored[1], 2.0, 1e-12);
  EXPECT_EQ(flsim_restore_gradient(prev, recv, 2, 0.0, restored), FLSIM_ERROR_VALIDATION);
}

TEST(CApi, Sweep) {
  flsim_config* config = nullptr;
  ASSERT_EQ(flsim_config_load_file(FLSIM_PRESET_DIR "/minimal.json", &config), FLSIM_OK) << flsim_last_error();
  const auto dir = temp_dir("sweep");
  const double values[] = {0.0, 0.5};
  ASSERT_EQ(flsim_sweep(config, "beta", values, 2, dir.string().c_str()), FLSIM_OK) << flsim_last_error();
  EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "beta=0.5" / "metrics.csv"));
  EXPECT_EQ(flsim_sweep(config, "beta", values, 0, dir.string().c_str()), FLSIM_ERROR_VALIDATION);
  fs::remove_all(dir);
  flsim_config_free(config);
  EXPECT_STRNE(flsim_version(), "");
}

}  // namespace
