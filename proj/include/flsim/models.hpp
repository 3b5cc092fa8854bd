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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flsim/param_vector.hpp"

namespace flsim {

enum class ModelKind { kLinearRegression, kLogisticRegression, kMlp };
enum class LossKind { kMse, kCrossEntropy };

std::string_view to_string(ModelKind kind);
std::string_view to_string(LossKind loss);
ModelKind parse_model_kind(std::string_view text);
LossKind parse_loss_kind(std::string_view text);

/// Architecture of one of the tiny hand-differentiated models.
///
/// Parameter layout is row-major weight matrices followed by their bias
/// vectors: linear/logistic hold W (output x input) then b; the one-hidden
/// layer MLP holds W1, b1, W2, b2 with a tanh hidden activation. With
/// bias = false the bias blocks are omitted, which gives the pure quadratic
/// 0.5 * w^2 from a 1x1 linear model with x = 1, y = 0.
///
/// mse is 0.5 * sum_j (out_j - y_j)^2 per sample; cross-entropy applies a
/// softmax to the outputs. Both are averaged over the batch rows.
struct ModelSpec {
  ModelKind kind = ModelKind::kLogisticRegression;
  std::size_t input_dim = 1;
  std::size_t output_dim = 1;
  std::size_t hidden_dim = 0;  // mlp only
  LossKind loss = LossKind::kCrossEntropy;
  bool bias = true;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Default loss: mse for linear regression, cross-entropy otherwise.
ModelSpec make_model_spec(ModelKind kind, std::size_t input_dim, std::size_t output_dim,
                          std::size_t hidden_dim = 0);
void validate(const ModelSpec& spec);
std::size_t param_count(const ModelSpec& spec);

/// Row-major sample matrix plus targets. Cross-entropy consumes labels; mse
/// consumes targets (rows x output_dim). Labels may accompany mse targets so
/// accuracy can still be measured.
struct Batch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> inputs;
  std::vector<std::uint32_t> labels;
  std::vector<double> targets;
};

void validate(const ModelSpec& spec, const Batch& batch);

/// Dense square matrix, row-major.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

double loss(const ModelSpec& spec, const ParamVector& w, const Batch& batch);
ParamVector gradient(const ModelSpec& spec, const ParamVector& w, const Batch& batch);

// Central differences with per-coordinate step step_scale * (1 + |w_i|).
ParamVector finite_diff_gradient(const ModelSpec& spec, const ParamVector& w, const Batch& batch,
                                 double step_scale = 1e-6);

inline constexpr std::size_t kMaxHessianParams = 64;

// Forward-mode differentiation of the analytic gradient, one column per
// parameter, so the result is exact up to rounding.
Matrix exact_hessian(const ModelSpec& spec, const ParamVector& w, const Batch& batch);

ParamVector local_sgd_step(const ModelSpec& spec, const ParamVector& w, const Batch& batch,
                           double eta);

// Fraction of rows whose argmax output matches the label.
double accuracy(const ModelSpec& spec, const ParamVector& w, const Batch& batch);

// Weights uniform in [-r, r], r = sqrt(6 / (fan_in + fan_out)); biases zero.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Dominant eigenvalue of a symmetric matrix by power iteration.
double largest_eigenvalue(const Matrix& m, int iterations = 500);

}  // namespace flsim
