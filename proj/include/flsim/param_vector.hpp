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
#include <initializer_list>
#include <span>
#include <vector>

namespace flsim {

/// Flat, fixed-length vector of finite doubles. Holds model weights,
/// gradients and momentum alike; shape metadata lives in ModelSpec.
///
/// Every constructor and arithmetic helper rejects NaN/Inf with a runtime
/// Error, so a non-finite value can never propagate silently.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> values);
  ParamVector(std::initializer_list<double> values);

  static ParamVector zeros(std::size_t n);
  static ParamVector filled(std::size_t n, double value);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> view() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

ParamVector add(const ParamVector& a, const ParamVector& b);
ParamVector subtract(const ParamVector& a, const ParamVector& b);
ParamVector scale(const ParamVector& a, double c);
ParamVector hadamard(const ParamVector& a, const ParamVector& b);
// a + c*b
ParamVector axpy(const ParamVector& a, double c, const ParamVector& b);
double l2_norm(const ParamVector& a);
double dot(const ParamVector& a, const ParamVector& b);
double max_abs_diff(const ParamVector& a, const ParamVector& b);

}  // namespace flsim
