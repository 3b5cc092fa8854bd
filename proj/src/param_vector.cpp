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

#include "flsim/param_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flsim/error.hpp"

namespace flsim {
namespace {

void require_finite(const std::vector<double>& v, const char* op) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw runtime_error(std::string(op) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

void require_same_length(const ParamVector& a, const ParamVector& b, const char* op) {
  if (a.size() != b.size()) {
    throw runtime_error(std::string(op) + ": length mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
}

template <typename Fn>
ParamVector zip(const ParamVector& a, const ParamVector& b, const char* op, Fn fn) {
  require_same_length(a, b, op);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(a[i], b[i]);
  require_finite(out, op);
  return ParamVector(std::move(out));
}

}  // namespace

ParamVector::ParamVector(std::vector<double> values) : values_(std::move(values)) {
  require_finite(values_, "ParamVector");
}

ParamVector::ParamVector(std::initializer_list<double> values) : values_(values) {
  require_finite(values_, "ParamVector");
}

ParamVector ParamVector::zeros(std::size_t n) { return ParamVector(std::vector<double>(n, 0.0)); }

ParamVector ParamVector::filled(std::size_t n, double value) {
  return ParamVector(std::vector<double>(n, value));
}

ParamVector add(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}

ParamVector subtract(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, "subtract", [](double x, double y) { return x - y; });
}

ParamVector hadamard(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, "hadamard", [](double x, double y) { return x * y; });
}

ParamVector axpy(const ParamVector& a, double c, const ParamVector& b) {
  if (!std::isfinite(c)) throw runtime_error("axpy: non-finite coefficient");
  return zip(a, b, "axpy", [c](double x, double y) { return x + c * y; });
}

ParamVector scale(const ParamVector& a, double c) {
  if (!std::isfinite(c)) throw runtime_error("scale: non-finite coefficient");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * a[i];
  require_finite(out, "scale");
  return ParamVector(std::move(out));
}

double l2_norm(const ParamVector& a) {
  // Scaled accumulation so that entries near DBL_MAX do not overflow.
  double largest = 0.0;
  for (double x : a.view()) largest = std::max(largest, std::fabs(x));
  if (largest == 0.0) return 0.0;
  double sum = 0.0;
  for (double x : a.view()) {
    const double r = x / largest;
    sum += r * r;
  }
  return largest * std::sqrt(sum);
}

double dot(const ParamVector& a, const ParamVector& b) {
  require_same_length(a, b, "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  require_same_length(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
  return worst;
}

}  // namespace flsim
