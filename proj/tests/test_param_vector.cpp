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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "flsim/error.hpp"
#include "flsim/param_vector.hpp"
#include "test_util.hpp"

namespace flsim {
namespace {

using testing::random_params;

TEST(ParamVector, RejectsNonFiniteValues) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ParamVector({1.0, nan}), Error);
  EXPECT_THROW(ParamVector(std::vector<double>{inf}), Error);
  EXPECT_THROW(ParamVector::filled(3, -inf), Error);
}

TEST(ParamVector, OverflowIsReportedNotPropagated) {
  const ParamVector big{1e308};
  EXPECT_THROW(add(big, big), Error);
  EXPECT_THROW(scale(big, 10.0), Error);
}

TEST(ParamVector, LengthMismatchThrows) {
  const ParamVector a{1, 2};
  const ParamVector b{1, 2, 3};
  EXPECT_THROW(add(a, b), Error);
  EXPECT_THROW(subtract(a, b), Error);
  EXPECT_THROW(hadamard(a, b), Error);
  EXPECT_THROW(axpy(a, 1.0, b), Error);
  EXPECT_THROW(dot(a, b), Error);
  EXPECT_THROW(max_abs_diff(a, b), Error);
}

TEST(ParamVector, Arithmetic) {
  const ParamVector a{1, -2, 3};
  const ParamVector b{4, 5, -6};
  EXPECT_EQ(add(a, b), ParamVector({5, 3, -3}));
  EXPECT_EQ(subtract(a, b), ParamVector({-3, -7, 9}));
  EXPECT_EQ(scale(a, -2.0), ParamVector({-2, 4, -6}));
  EXPECT_EQ(hadamard(a, b), ParamVector({4, -10, -18}));
  EXPECT_EQ(axpy(a, 0.5, b), ParamVector({3, 0.5, 0}));
  EXPECT_DOUBLE_EQ(dot(a, b), -24.0);
  EXPECT_DOUBLE_EQ(max_abs_diff(a, b), 9.0);
}

TEST(ParamVector, Norm) {
  EXPECT_DOUBLE_EQ(l2_norm(ParamVector{3, 4}), 5.0);
  EXPECT_EQ(l2_norm(ParamVector::zeros(7)), 0.0);
  EXPECT_EQ(l2_norm(ParamVector{}), 0.0);
  // No overflow for large entries.
  EXPECT_NEAR(l2_norm(ParamVector{3e200, 4e200}) / 5e200, 1.0, 1e-15);
}

TEST(ParamVector, AlgebraicProperties) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t n = 1 + seed * 7;
    const auto a = random_params(n, seed);
    const auto b = random_params(n, seed + 1000);
    EXPECT_EQ(add(a, b), add(b, a));
    EXPECT_EQ(hadamard(a, b), hadamard(b, a));
    EXPECT_EQ(subtract(a, a), ParamVector::zeros(n));
    EXPECT_EQ(scale(a, 1.0), a);
    EXPECT_EQ(axpy(a, 0.0, b), a);
    EXPECT_LE(max_abs_diff(add(subtract(a, b), b), a), 1e-14);
    EXPECT_GE(l2_norm(a), 0.0);
    // Triangle and Cauchy-Schwarz inequalities.
    EXPECT_LE(l2_norm(add(a, b)), l2_norm(a) + l2_norm(b) + 1e-12);
    EXPECT_LE(std::fabs(dot(a, b)), l2_norm(a) * l2_norm(b) + 1e-12);
    EXPECT_NEAR(dot(a, a), l2_norm(a) * l2_norm(a), 1e-10 * (1.0 + dot(a, a)));
  }
}

}  // namespace
}  // namespace flsim
