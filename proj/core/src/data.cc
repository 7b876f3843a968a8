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

#include "fedsim/data.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsim/error.h"
#include "fedsim/random.h"

namespace fedsim {

void Dataset::validate() const {
  require(input_dim > 0, ErrorCode::kFormat, "dataset: input_dim must be positive");
  require(num_classes >= 2, ErrorCode::kFormat, "dataset: need at least 2 classes");
  require(features.size() == labels.size() * input_dim, ErrorCode::kFormat,
          "dataset: feature count does not match label count");
  for (int y : labels) {
    require(y >= 0 && y < num_classes, ErrorCode::kFormat,
            "dataset: label " + std::to_string(y) + " out of range");
  }
  for (double x : features) {
    require(std::isfinite(x), ErrorCode::kNonFinite, "dataset: non-finite feature");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.input_dim = input_dim;
  out.num_classes = num_classes;
  out.features.reserve(indices.size() * input_dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    require(i < size(), ErrorCode::kInvalidArgument, "dataset subset index out of range");
    const auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  require(spec.num_classes >= 2 && spec.input_dim > 0 && spec.per_class_count > 0,
          ErrorCode::kInvalidArgument, "gen_synthetic: counts must be positive");
  require(spec.noise_sigma >= 0.0 && std::isfinite(spec.noise_sigma),
          ErrorCode::kInvalidArgument, "gen_synthetic: noise_sigma must be >= 0");
  Rng rng(spec.seed);
  const std::size_t d = spec.input_dim;
  std::vector<double> means(static_cast<std::size_t>(spec.num_classes) * d);
  for (double& m : means) m = rng.uniform(-2.0, 2.0);

  Dataset ds;
  ds.input_dim = d;
  ds.num_classes = spec.num_classes;
  const std::size_t n = static_cast<std::size_t>(spec.num_classes) * spec.per_class_count;
  ds.features.reserve(n * d);
  ds.labels.reserve(n);
  for (int c = 0; c < spec.num_classes; ++c) {
    const double* mean = means.data() + static_cast<std::size_t>(c) * d;
    for (std::size_t j = 0; j < spec.per_class_count; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        // noise_sigma = 0 must reproduce the mean exactly, so skip the draw.
        ds.features.push_back(spec.noise_sigma == 0.0
                                  ? mean[k]
                                  : mean[k] + spec.noise_sigma * rng.normal());
      }
      ds.labels.push_back(c);
    }
  }
  return ds;
}

std::vector<std::size_t> largest_remainder_sizes(std::span<const double> proportions,
                                                 std::size_t total) {
  require(!proportions.empty(), ErrorCode::kInvalidArgument,
          "largest_remainder_sizes: no proportions");
  double psum = 0.0;
  for (double p : proportions) {
    require(std::isfinite(p) && p >= 0.0, ErrorCode::kInvalidArgument,
            "largest_remainder_sizes: proportions must be finite and >= 0");
    psum += p;
  }
  require(psum > 0.0, ErrorCode::kInvalidArgument,
          "largest_remainder_sizes: proportions sum to zero");

  const std::size_t n = proportions.size();
  std::vector<std::size_t> sizes(n);
  std::vector<double> remainders(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double quota = proportions[i] / psum * static_cast<double>(total);
    const double whole = std::floor(quota);
    sizes[i] = static_cast<std::size_t>(whole);
    remainders[i] = quota - whole;
    assigned += sizes[i];
  }
  // Float round-off can push the floors one unit past the total.
  while (assigned > total) {
    const auto it = std::max_element(sizes.begin(), sizes.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b];
  });
  for (std::size_t j = 0; assigned < total; j = (j + 1) % n) {
    ++sizes[order[j]];
    ++assigned;
  }
  return sizes;
}

std::vector<double> dirichlet_proportions(int n, double alpha, std::uint64_t seed) {
  require(n >= 1, ErrorCode::kInvalidArgument, "dirichlet: need at least one client");
  require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::kInvalidArgument,
          "dirichlet: alpha must be positive");
  Rng rng(seed);
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double& x : p) {
    x = rng.gamma(alpha);
    total += x;
  }
  if (total <= 0.0) {
    // Every draw underflowed (only possible for tiny alpha).
    std::fill(p.begin(), p.end(), 1.0 / n);
    return p;
  }
  for (double& x : p) x /= total;
  return p;
}

std::vector<std::vector<std::size_t>> partition_with_proportions(
    std::size_t total, std::span<const double> proportions, std::uint64_t shuffle_seed) {
  const std::vector<std::size_t> sizes = largest_remainder_sizes(proportions, total);
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(shuffle_seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::vector<std::size_t>> shards(sizes.size());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    shards[i].assign(order.begin() + static_cast<std::ptrdiff_t>(offset),
                     order.begin() + static_cast<std::ptrdiff_t>(offset + sizes[i]));
    offset += sizes[i];
  }
  return shards;
}

std::vector<std::vector<std::size_t>> dirichlet_partition_indices(std::size_t total,
                                                                  const PartitionSpec& spec) {
  require(spec.num_clients >= 1, ErrorCode::kInvalidArgument,
          "partition: num_clients must be >= 1");
  require(spec.min_shard >= 1, ErrorCode::kInvalidArgument,
          "partition: min_shard must be >= 1");
  require(spec.alpha > 0.0 && std::isfinite(spec.alpha), ErrorCode::kInvalidArgument,
          "partition: alpha must be positive");
  const auto n = static_cast<std::size_t>(spec.num_clients);
  const auto min_shard = static_cast<std::size_t>(spec.min_shard);
  require(total >= n * min_shard, ErrorCode::kCapacity,
          "partition: " + std::to_string(total) + " records cannot fill " +
              std::to_string(n) + " shards of at least " + std::to_string(min_shard));

  for (int attempt = 0; attempt <= kMaxPartitionRedraws; ++attempt) {
    const std::vector<double> p = dirichlet_proportions(
        spec.num_clients, spec.alpha,
        derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
    const std::vector<std::size_t> sizes = largest_remainder_sizes(p, total);
    if (std::all_of(sizes.begin(), sizes.end(),
                    [&](std::size_t s) { return s >= min_shard; })) {
      return partition_with_proportions(total, p, spec.seed);
    }
  }
  fail(ErrorCode::kBudgetExhausted,
       "partition: no draw satisfied min_shard within " +
           std::to_string(kMaxPartitionRedraws) + " redraws");
}

std::vector<ClientDataset> dirichlet_partition(const Dataset& ds, const PartitionSpec& spec) {
  auto shards = dirichlet_partition_indices(ds.size(), spec);
  std::vector<ClientDataset> parts;
  parts.reserve(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i) {
    ClientDataset part;
    part.client_id = static_cast<int>(i);
    part.data = ds.subset(shards[i]);
    part.source_indices = std::move(shards[i]);
    parts.push_back(std::move(part));
  }
  return parts;
}

HoldoutSplit holdout_split(const Dataset& ds, double frac, std::uint64_t seed) {
  require(frac > 0.0 && frac < 1.0, ErrorCode::kInvalidArgument,
          "holdout_split: frac must lie in (0, 1)");
  const std::size_t n = ds.size();
  // The epsilon keeps products like 0.7 * 10 = 7.000000000000001 at 7.
  const auto n_val =
      static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9));
  require(n_val >= 1 && n_val < n, ErrorCode::kInvalidArgument,
          "holdout_split: one side of the split is empty");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const std::span<const std::size_t> all(order);
  return HoldoutSplit{ds.subset(all.subspan(n_val)), ds.subset(all.first(n_val))};
}

GroundTruth ground_truth_sizes(std::span<const std::size_t> sizes) {
  require(!sizes.empty(), ErrorCode::kInvalidArgument, "ground truth: no clients");
  double total = 0.0;
  for (std::size_t s : sizes) {
    require(s > 0, ErrorCode::kInvalidArgument, "ground truth: empty client");
    total += static_cast<double>(s);
  }
  std::vector<double> shares;
  shares.reserve(sizes.size());
  for (std::size_t s : sizes) shares.push_back(static_cast<double>(s) / total);
  return GroundTruth{ContributionVector::from_shares(std::move(shares))};
}

GroundTruth ground_truth_sizes(std::span<const ClientDataset> parts) {
  std::vector<std::size_t> sizes;
  sizes.reserve(parts.size());
  for (const ClientDataset& p : parts) sizes.push_back(p.size());
  return ground_truth_sizes(sizes);
}

}  // namespace fedsim
