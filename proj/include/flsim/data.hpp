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
#include <span>
#include <string>
#include <vector>

#include "flsim/models.hpp"
#include "flsim/random.hpp"

namespace flsim {

struct Dataset {
  std::size_t rows = 0;
  std::size_t input_dim = 0;
  std::size_t class_count = 0;
  std::vector<double> inputs;  // rows x input_dim, row-major
  std::vector<std::uint32_t> labels;
};

void validate(const Dataset& data);

struct ClientShard {
  std::size_t client_id = 0;
  std::vector<std::size_t> indices;  // ascending row indices into the dataset
  std::size_t n_k = 0;
  double p_k = 0.0;  // n_k / n

  friend bool operator==(const ClientShard&, const ClientShard&) = default;
};

/// Gaussian clusters: one N(0, I) center per class, samples drawn around
/// their center with standard deviation cluster_spread. Labels are assigned
/// round-robin before the rows are shuffled, so every class is non-empty
/// whenever n_samples >= class_count.
Dataset generate_classification(std::uint64_t seed, std::size_t n_samples, std::size_t input_dim,
                                std::size_t class_count, double cluster_spread);

inline constexpr int kPartitionRetries = 100;

/// Two-level Dirichlet Non-IID split. Shard sizes follow Dirichlet(size_alpha)
/// over clients (largest-remainder rounding, redrawn until every client has
/// at least one row); each client's class mixture follows
/// Dirichlet(label_alpha) over classes. Rows are then dealt one per client per
/// pass, each client drawing a class from its mixture restricted to classes
/// that still have rows left, so the shards always partition the dataset.
std::vector<ClientShard> partition_noniid(const Dataset& data, std::size_t n_clients,
                                          double label_alpha, double size_alpha,
                                          std::uint64_t seed);

/// Reads an MNIST-style IDX pair (magic 2051 images, 2049 labels, big-endian
/// headers). Pixels are scaled to [0, 1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

struct DataSplit {
  Dataset train;
  Dataset test;
};

// Seeded held-out split; the test part gets floor(rows * fraction) rows.
DataSplit holdout_split(const Dataset& data, double fraction, std::uint64_t seed);

// Rows gathered into a Batch; mse models get one-hot targets.
Batch make_batch(const Dataset& data, std::span<const std::size_t> rows, const ModelSpec& spec);
Batch full_batch(const Dataset& data, const ModelSpec& spec);

/// Minibatches over one shard, reshuffled with a seeded permutation at the
/// start of every epoch. batch_size 0 (or >= shard size) yields the whole
/// shard each time.
class BatchStream {
 public:
  BatchStream(const Dataset& data, const ClientShard& shard, std::size_t batch_size,
              std::uint64_t seed);

  Batch next(const ModelSpec& spec);

 private:
  const Dataset* data_;
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

}  // namespace flsim
