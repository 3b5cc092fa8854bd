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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "flsim/data.hpp"
#include "flsim/models.hpp"
#include "flsim/random.hpp"

namespace flsim::testing {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("flsim_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Random rows with labels; mse targets are filled with N(0,1) values.
inline Batch random_batch(const ModelSpec& spec, std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  Batch b;
  b.rows = rows;
  b.cols = spec.input_dim;
  for (std::size_t i = 0; i < rows * spec.input_dim; ++i) b.inputs.push_back(standard_normal(rng));
  for (std::size_t i = 0; i < rows; ++i) b.labels.push_back(static_cast<std::uint32_t>(uniform_index(rng, spec.output_dim)));
  if (spec.loss == LossKind::kMse) {
    for (std::size_t i = 0; i < rows * spec.output_dim; ++i) b.targets.push_back(standard_normal(rng));
  }
  return b;
}

inline ParamVector random_params(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<double> w(n);
  for (auto& x : w) x = scale * standard_normal(rng);
  return ParamVector(std::move(w));
}

// The 1-d quadratic 0.5 * w^2: 1x1 linear model without bias, x = 1, y = 0.
inline ModelSpec quadratic_spec() {
  ModelSpec spec = make_model_spec(ModelKind::kLinearRegression, 1, 1);
  spec.bias = false;
  return spec;
}

inline Batch quadratic_batch() {
  Batch b;
  b.rows = 1;
  b.cols = 1;
  b.inputs = {1.0};
  b.labels = {0};
  b.targets = {0.0};
  return b;
}

}  // namespace flsim::testing
