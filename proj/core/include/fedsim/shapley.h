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

#ifndef FEDSIM_SHAPLEY_H_
#define FEDSIM_SHAPLEY_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fedsim/contribution.h"
#include "fedsim/data.h"
#include "fedsim/model.h"
#include "fedsim/param_math.h"
#include "fedsim/strategies.h"

namespace fedsim {

// Bit i set <=> the i-th client (in client-id order) is in the coalition.
using SubsetMask = std::uint64_t;

inline constexpr int kExactShapleyMaxClients = 16;
inline constexpr int kMaxShapleyClients = 63;

// Coalition utilities v(S) for one round.
class RoundValueTable {
 public:
  explicit RoundValueTable(int num_players);

  int num_players() const noexcept { return num_players_; }
  void set(SubsetMask subset, double value);
  bool has(SubsetMask subset) const;
  double get(SubsetMask subset) const;  // throws if absent
  bool complete() const;

  friend bool operator==(const RoundValueTable&, const RoundValueTable&) = default;

 private:
  int num_players_;
  std::vector<double> values_;
  std::vector<unsigned char> known_;
};

struct RoundShapley {
  std::vector<double> phi;  // may be negative
  int round_index = 0;
  double full_value = 0.0;   // v(N)
  double empty_value = 0.0;  // v(empty)
};

enum class ShapleyMode { kExact, kMonteCarlo };
enum class UtilityKind { kAccuracy, kNegLoss };
enum class NormalizationMode { kClamp, kShiftMin };

struct ShapleyConfig {
  ShapleyMode mode = ShapleyMode::kExact;
  int mc_perms = 200;
  UtilityKind utility = UtilityKind::kAccuracy;
  NormalizationMode normalization = NormalizationMode::kClamp;
  bool per_round_normalize = false;
  int exact_cap = kExactShapleyMaxClients;

  void validate() const;

  friend bool operator==(const ShapleyConfig&, const ShapleyConfig&) = default;
};

using ValueFn = std::function<double(SubsetMask)>;

// phi_i = sum over S not containing i of |S|!(n-|S|-1)!/n! [v(S+i) - v(S)].
RoundShapley exact_shapley(const RoundValueTable& table, int n,
                           int cap = kExactShapleyMaxClients);

// Average marginal contribution over `num_perms` seeded uniform permutations.
// Coalition values are memoized, so value_fn sees each subset at most once.
RoundShapley mc_shapley(const ValueFn& value_fn, int n, int num_perms, std::uint64_t seed);

// The permutation estimator run over every one of the n! orderings exactly
// once. Exact up to round-off; intended for small n.
RoundShapley mc_shapley_all_permutations(const ValueFn& value_fn, int n);

// Utility of the model reconstructed from coalition `subset` of `updates`:
// the size-weighted average of the members' params, or prev_global for the
// empty coalition, evaluated on `val_set`.
double reconstruct_utility(const ModelArch& arch, const ParamVec& prev_global,
                           std::span<const ClientUpdate> updates, SubsetMask subset,
                           const Dataset& val_set,
                           UtilityKind utility = UtilityKind::kAccuracy);

// Lazily evaluated, memoized reconstruction game for one round. Player i is
// the i-th update after sorting by client id.
class ReconstructionGame {
 public:
  ReconstructionGame(const ModelArch& arch, const ParamVec& prev_global,
                     std::span<const ClientUpdate> updates, const Dataset& val_set,
                     UtilityKind utility);

  int num_players() const noexcept { return static_cast<int>(updates_.size()); }
  double value(SubsetMask subset);
  std::size_t evaluations() const noexcept { return cache_.size(); }

  // Every subset, evaluated directly in ascending mask order.
  RoundValueTable eager_table() const;

 private:
  const ModelArch& arch_;
  const ParamVec& prev_global_;
  std::vector<ClientUpdate> updates_;
  const Dataset& val_set_;
  UtilityKind utility_;
  std::unordered_map<SubsetMask, double> cache_;
};

// Per-round valuation of the submitted updates against the round's incoming
// global model. phi is indexed by client-id order.
RoundShapley round_shapley(const ModelArch& arch, const ParamVec& prev_global,
                           std::span<const ClientUpdate> updates, const Dataset& val_set,
                           const ShapleyConfig& cfg, std::uint64_t seed, int round_index);

// raw_i = sum_t phi_i^t; negatives clamped to 0 (or shifted by the minimum);
// normalized to sum 1, uniform when nothing positive remains.
ContributionVector accumulate_normalize(std::span<const RoundShapley> rounds,
                                        const ShapleyConfig& cfg = {});

}  // namespace fedsim

#endif  // FEDSIM_SHAPLEY_H_
