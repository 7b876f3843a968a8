/*
 * Copyright 2026 The FedSim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_DATA_H_
#define FEDSIM_DATA_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedsim/contribution.h"

namespace fedsim {

// Row-major feature matrix with integer class labels.
struct Dataset {
  std::size_t input_dim = 0;
  int num_classes = 0;
  std::vector<double> features;  // size() * input_dim values
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * input_dim, input_dim);
  }

  // Throws kFormat if the shape or labels are inconsistent.
  void validate() const;

  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SyntheticSpec {
  int num_classes = 4;
  std::size_t input_dim = 8;
  std::size_t per_class_count = 250;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

// Gaussian blobs: one mean per class drawn uniformly from [-2, 2]^input_dim,
// each point mean + N(0, noise_sigma^2 I). Records are grouped by class.
Dataset gen_synthetic(const SyntheticSpec& spec);

struct PartitionSpec {
  int num_clients = 5;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  int min_shard = 1;

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

struct ClientDataset {
  int client_id = 0;
  Dataset data;
  std::vector<std::size_t> source_indices;  // rows of the partitioned dataset

  std::size_t size() const noexcept { return data.size(); }
};

struct GroundTruth {
  ContributionVector shares;
};

inline constexpr int kMaxPartitionRedraws = 100;

// Integer sizes summing exactly to `total`: floor(p_i * total) plus one extra
// unit for the largest remainders (ties go to the lower index).
std::vector<std::size_t> largest_remainder_sizes(std::span<const double> proportions,
                                                 std::size_t total);

// p ~ Dirichlet(alpha * 1_n) from normalized Gamma(alpha, 1) draws.
std::vector<double> dirichlet_proportions(int n, double alpha, std::uint64_t seed);

// Shuffles 0..total-1 with `shuffle_seed` and slices contiguous shards of the
// largest-remainder sizes of `proportions`.
std::vector<std::vector<std::size_t>> partition_with_proportions(
    std::size_t total, std::span<const double> proportions, std::uint64_t shuffle_seed);

// Quantity-based Dirichlet split of `total` record indices. Proportions are
// drawn with seed derive_seed(spec.seed, attempt) and redrawn while any shard
// is below spec.min_shard, at most kMaxPartitionRedraws times.
std::vector<std::vector<std::size_t>> dirichlet_partition_indices(std::size_t total,
                                                                  const PartitionSpec& spec);

std::vector<ClientDataset> dirichlet_partition(const Dataset& ds, const PartitionSpec& spec);

struct HoldoutSplit {
  Dataset train;
  Dataset validation;
};

// Seeded shuffle; the first ceil(frac * N) records become the validation set.
HoldoutSplit holdout_split(const Dataset& ds, double frac, std::uint64_t seed);

GroundTruth ground_truth_sizes(std::span<const std::size_t> sizes);
GroundTruth ground_truth_sizes(std::span<const ClientDataset> parts);

}  // namespace fedsim

#endif  // FEDSIM_DATA_H_
