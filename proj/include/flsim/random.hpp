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
#include <random>
#include <vector>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace flsim {

// std::mt19937_64 is bit-specified by the standard; the boost distributions
// are header-only, so draws are identical on every host using the same boost.
using Rng = std::mt19937_64;

// Stream identifiers for derive_seed so independent consumers of one user seed
// never share a sequence.
enum class SeedStream : std::uint64_t {
  kData = 1,
  kHoldout = 2,
  kPartitionSizes = 3,
  kPartitionLabels = 4,
  kInit = 5,
  kBatchOrder = 6,
  kClientSampling = 7,
  kJitter = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) {
  return boost::random::normal_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

/// Symmetric Dirichlet draw via normalized Gamma(alpha) variates. If every
/// component underflows to zero (tiny alpha) one coordinate gets all the mass.
inline std::vector<double> dirichlet(Rng& rng, std::size_t k, double alpha) {
  boost::random::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> out(k);
  double total = 0.0;
  for (auto& x : out) {
    x = gamma(rng);
    total += x;
  }
  if (total <= 0.0) {
    out.assign(k, 0.0);
    out[uniform_index(rng, k)] = 1.0;
    return out;
  }
  for (auto& x : out) x /= total;
  return out;
}

}  // namespace flsim
