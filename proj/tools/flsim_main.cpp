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

// flsim: run, compare and sweep federated training simulations.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flsim/flsim.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

std::string output_root() {
  const char* env = std::getenv("FLSIM_OUT");
  return env && *env ? env : "flsim_out";
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

int fail(flsim_status status) {
  std::fprintf(stderr, "flsim: %s\n", flsim_last_error());
  return status == FLSIM_ERROR_RUNTIME ? kExitRuntime : kExitValidation;
}

class Config {
 public:
  ~Config() { flsim_config_free(handle_); }
  flsim_status load(const std::string& path) { return flsim_config_load_file(path.c_str(), &handle_); }
  flsim_config* get() const { return handle_; }

 private:
  flsim_config* handle_ = nullptr;
};

int cmd_run(const std::string& config_path, std::string out_dir, const std::string& strategy) {
  Config config;
  if (auto s = config.load(config_path); s != FLSIM_OK) return fail(s);
  if (!strategy.empty()) {
    if (auto s = flsim_config_set_strategy(config.get(), strategy.c_str()); s != FLSIM_OK) return fail(s);
  }
  if (out_dir.empty()) out_dir = (fs::path(output_root()) / stem_of(config_path)).string();

  flsim_log* log = nullptr;
  if (auto s = flsim_run(config.get(), &log); s != FLSIM_OK) return fail(s);
  const flsim_status written = flsim_log_write(log, config.get(), out_dir.c_str());
  flsim_summary summary{};
  flsim_log_summary(log, &summary);
  flsim_log_free(log);
  if (written != FLSIM_OK) return fail(written);

  std::printf("rounds            %zu\n", summary.rounds);
  std::printf("final train loss  %.6g\n", summary.final_train_loss);
  std::printf("final accuracy    %.6g\n", summary.final_eval_metric);
  std::printf("mean round time   %.6g s\n", summary.mean_round_time);
  std::printf("utilization       %.6g\n", summary.mean_utilization);
  std::printf("wrote %s\n", out_dir.c_str());
  return 0;
}

int cmd_compare(const std::string& baseline, const std::string& candidate, std::string report) {
  if (report.empty()) report = (fs::path(output_root()) / "comparison.json").string();
  flsim_comparison cmp{};
  if (auto s = flsim_compare_dirs(baseline.c_str(), candidate.c_str(), report.c_str(), &cmp); s != FLSIM_OK) {
    return fail(s);
  }
  std::printf("mean round time   %.6g s -> %.6g s\n", cmp.baseline_mean_time, cmp.candidate_mean_time);
  std::printf("saving            %.2f%%\n", 100.0 * cmp.saving);
  std::printf("final loss delta  %+.6g\n", cmp.final_loss_delta);
  std::printf("final acc delta   %+.6g\n", cmp.final_eval_delta);
  std::printf("wrote %s\n", report.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<double>& values,
              std::string out_dir) {
  Config config;
  if (auto s = config.load(config_path); s != FLSIM_OK) return fail(s);
  if (out_dir.empty()) out_dir = (fs::path(output_root()) / (stem_of(config_path) + "-" + param)).string();
  if (auto s = flsim_sweep(config.get(), param.c_str(), values.data(), values.size(), out_dir.c_str());
      s != FLSIM_OK) {
    return fail(s);
  }
  std::printf("%zu runs, table at %s\n", values.size(), (fs::path(out_dir) / "sweep.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated training simulator (FedAvg and Overlap-FedAvg)", "flsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", flsim_version());

  std::string config_path;
  std::string out_dir;
  std::string strategy;
  auto* run = app.add_subcommand("run", "Run one experiment and write metrics.csv and summary.json");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (default $FLSIM_OUT/<config name>)");
  run->add_option("--strategy", strategy, "Override the config's strategy")->check(CLI::IsMember({"fedavg", "overlap"}));

  std::string baseline;
  std::string candidate;
  std::string report;
  auto* compare = app.add_subcommand("compare", "Compare two run directories");
  compare->add_option("baseline", baseline, "Baseline run directory")->required();
  compare->add_option("candidate", candidate, "Candidate run directory")->required();
  compare->add_option("--out", report, "Report path (default $FLSIM_OUT/comparison.json)");

  std::string param;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sweep->add_option("config", config_path, "Base experiment config (JSON)")->required();
  sweep->add_option("--param", param, "Parameter to vary (lambda, beta, eta, eta_decay, server_eta)")->required();
  sweep->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();
  sweep->add_option("--out", out_dir, "Output directory (default $FLSIM_OUT/<config name>-<param>)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, strategy);
    if (*compare) return cmd_compare(baseline, candidate, report);
    return cmd_sweep(config_path, param, values, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "flsim: %s\n", e.what());
    return kExitRuntime;
  }
}
