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

#include "flsim/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "flsim/error.hpp"

namespace flsim {
namespace {

std::vector<std::size_t> largest_remainder(const std::vector<double>& shares, std::size_t total) {
  std::vector<std::size_t> counts(shares.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    const double exact = shares[k] * static_cast<double>(total);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) {
    counts[remainders[i % remainders.size()].second] += 1;
  }
  return counts;
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.rows = rows.size();
  out.input_dim = data.input_dim;
  out.class_count = data.class_count;
  out.inputs.reserve(rows.size() * data.input_dim);
  out.labels.reserve(rows.size());
  for (auto r : rows) {
    auto first = data.inputs.begin() + static_cast<std::ptrdiff_t>(r * data.input_dim);
    out.inputs.insert(out.inputs.end(), first, first + static_cast<std::ptrdiff_t>(data.input_dim));
    out.labels.push_back(data.labels[r]);
  }
  return out;
}

}  // namespace

void validate(const Dataset& data) {
  if (data.rows == 0) throw validation_error("dataset is empty");
  if (data.input_dim == 0 || data.inputs.size() != data.rows * data.input_dim) {
    throw validation_error("dataset input shape is inconsistent");
  }
  if (data.class_count == 0 || data.labels.size() != data.rows) {
    throw validation_error("dataset labels are inconsistent");
  }
  for (auto label : data.labels) {
    if (label >= data.class_count) throw validation_error("dataset label out of range");
  }
}

Dataset generate_classification(std::uint64_t seed, std::size_t n_samples, std::size_t input_dim,
                                std::size_t class_count, double cluster_spread) {
  if (n_samples == 0 || input_dim == 0 || class_count == 0) {
    throw validation_error("generate_classification: counts must be positive");
  }
  if (!(cluster_spread >= 0.0) || !std::isfinite(cluster_spread)) {
    throw validation_error("generate_classification: cluster_spread must be >= 0");
  }
  Rng rng(derive_seed(seed, SeedStream::kData));
  std::vector<double> centers(class_count * input_dim);
  for (auto& c : centers) c = standard_normal(rng);

  std::vector<std::uint32_t> labels(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) labels[i] = static_cast<std::uint32_t>(i % class_count);
  shuffle(labels, rng);

  Dataset data;
  data.rows = n_samples;
  data.input_dim = input_dim;
  data.class_count = class_count;
  data.labels = std::move(labels);
  data.inputs.resize(n_samples * input_dim);
  for (std::size_t r = 0; r < n_samples; ++r) {
    const double* center = &centers[data.labels[r] * input_dim];
    for (std::size_t i = 0; i < input_dim; ++i) {
      data.inputs[r * input_dim + i] = center[i] + cluster_spread * standard_normal(rng);
    }
  }
  return data;
}

std::vector<ClientShard> partition_noniid(const Dataset& data, std::size_t n_clients,
                                          double label_alpha, double size_alpha,
                                          std::uint64_t seed) {
  validate(data);
  if (n_clients == 0) throw validation_error("partition: n_clients must be >= 1");
  if (!(label_alpha > 0.0) || !(size_alpha > 0.0) || !std::isfinite(label_alpha) ||
      !std::isfinite(size_alpha)) {
    throw validation_error("partition: alphas must be positive and finite");
  }
  const std::size_t n = data.rows;
  const std::size_t classes = data.class_count;

  Rng size_rng(derive_seed(seed, SeedStream::kPartitionSizes));
  std::vector<std::size_t> quota;
  bool ok = false;
  for (int attempt = 0; attempt < kPartitionRetries && !ok; ++attempt) {
    quota = largest_remainder(dirichlet(size_rng, n_clients, size_alpha), n);
    ok = std::all_of(quota.begin(), quota.end(), [](std::size_t q) { return q > 0; });
  }
  if (!ok) {
    throw validation_error("partition: could not give every client a sample within " +
                           std::to_string(kPartitionRetries) + " retries");
  }

  Rng label_rng(derive_seed(seed, SeedStream::kPartitionLabels));
  std::vector<std::vector<double>> mixture(n_clients);
  for (auto& m : mixture) m = dirichlet(label_rng, classes, label_alpha);

  std::vector<std::vector<std::size_t>> pools(classes);
  for (std::size_t r = 0; r < n; ++r) pools[data.labels[r]].push_back(r);
  for (auto& pool : pools) shuffle(pool, label_rng);

  std::vector<ClientShard> shards(n_clients);
  std::vector<std::size_t> remaining = quota;
  std::size_t left = n;
  while (left > 0) {
    for (std::size_t k = 0; k < n_clients; ++k) {
      if (remaining[k] == 0) continue;
      double mass = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        if (!pools[c].empty()) mass += mixture[k][c];
      }
      std::size_t chosen = classes;
      if (mass > 0.0) {
        const double u = uniform(label_rng, 0.0, mass);
        double acc = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
          if (pools[c].empty()) continue;
          acc += mixture[k][c];
          chosen = c;
          if (u < acc) break;
        }
      } else {
        std::vector<std::size_t> open;
        for (std::size_t c = 0; c < classes; ++c) {
          if (!pools[c].empty()) open.push_back(c);
        }
        chosen = open[uniform_index(label_rng, open.size())];
      }
      shards[k].indices.push_back(pools[chosen].back());
      pools[chosen].pop_back();
      --remaining[k];
      --left;
    }
  }

  for (std::size_t k = 0; k < n_clients; ++k) {
    auto& s = shards[k];
    std::sort(s.indices.begin(), s.indices.end());
    s.client_id = k;
    s.n_k = s.indices.size();
    s.p_k = static_cast<double>(s.n_k) / static_cast<double>(n);
  }
  return shards;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  if (images.size() < 4 || read_be32(images, 0) != 0x00000803) {
    throw validation_error("'" + images_path + "' is not an IDX file (expected image magic 2051)");
  }
  if (labels.size() < 4 || read_be32(labels, 0) != 0x00000801) {
    throw validation_error("'" + labels_path + "' is not an IDX file (expected label magic 2049)");
  }
  if (images.size() < 16) throw validation_error("'" + images_path + "' is truncated");
  if (labels.size() < 8) throw validation_error("'" + labels_path + "' is truncated");

  const std::size_t count = read_be32(images, 4);
  const std::size_t height = read_be32(images, 8);
  const std::size_t width = read_be32(images, 12);
  const std::size_t label_count = read_be32(labels, 4);
  if (count != label_count) {
    throw validation_error("IDX image/label count mismatch (" + std::to_string(count) + " vs " +
                           std::to_string(label_count) + ")");
  }
  const std::size_t pixels = height * width;
  if (images.size() < 16 + count * pixels) throw validation_error("'" + images_path + "' is truncated");
  if (labels.size() < 8 + count) throw validation_error("'" + labels_path + "' is truncated");

  Dataset data;
  data.rows = count;
  data.input_dim = pixels;
  data.inputs.resize(count * pixels);
  for (std::size_t i = 0; i < count * pixels; ++i) data.inputs[i] = images[16 + i] / 255.0;
  data.labels.resize(count);
  std::uint32_t max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    data.labels[i] = labels[8 + i];
    max_label = std::max(max_label, data.labels[i]);
  }
  data.class_count = static_cast<std::size_t>(max_label) + 1;
  validate(data);
  return data;
}

DataSplit holdout_split(const Dataset& data, double fraction, std::uint64_t seed) {
  validate(data);
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw validation_error("holdout fraction must be in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(data.rows) * fraction));
  if (n_test == 0 || n_test >= data.rows) {
    throw validation_error("holdout split leaves an empty train or test set");
  }
  std::vector<std::size_t> order(data.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, SeedStream::kHoldout));
  shuffle(order, rng);
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {subset(data, train), subset(data, test)};
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> rows, const ModelSpec& spec) {
  if (data.input_dim != spec.input_dim) {
    throw validation_error("dataset input_dim does not match model input_dim");
  }
  Batch batch;
  batch.rows = rows.size();
  batch.cols = data.input_dim;
  batch.inputs.reserve(rows.size() * data.input_dim);
  batch.labels.reserve(rows.size());
  for (auto r : rows) {
    auto first = data.inputs.begin() + static_cast<std::ptrdiff_t>(r * data.input_dim);
    batch.inputs.insert(batch.inputs.end(), first, first + static_cast<std::ptrdiff_t>(data.input_dim));
    batch.labels.push_back(data.labels[r]);
  }
  if (spec.loss == LossKind::kMse) {
    batch.targets.assign(rows.size() * spec.output_dim, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (batch.labels[i] < spec.output_dim) batch.targets[i * spec.output_dim + batch.labels[i]] = 1.0;
    }
  }
  return batch;
}

Batch full_batch(const Dataset& data, const ModelSpec& spec) {
  std::vector<std::size_t> rows(data.rows);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return make_batch(data, rows, spec);
}

BatchStream::BatchStream(const Dataset& data, const ClientShard& shard, std::size_t batch_size,
                         std::uint64_t seed)
    : data_(&data), order_(shard.indices), batch_size_(batch_size), rng_(seed) {
  if (order_.empty()) throw validation_error("BatchStream: empty shard");
  if (batch_size_ == 0 || batch_size_ > order_.size()) batch_size_ = order_.size();
  shuffle(order_, rng_);
}

Batch BatchStream::next(const ModelSpec& spec) {
  if (cursor_ + batch_size_ > order_.size()) {
    shuffle(order_, rng_);
    cursor_ = 0;
  }
  std::span<const std::size_t> rows(order_.data() + cursor_, batch_size_);
  cursor_ += batch_size_;
  return make_batch(*data_, rows, spec);
}

}  // namespace flsim
