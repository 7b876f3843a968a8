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

#include "fedsim/shapley.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsim/error.h"
#include "fedsim/random.h"

namespace fedsim {
namespace {

std::size_t table_size(int n) {
  require(n >= 1 && n <= 30, ErrorCode::kInvalidArgument,
          "value table supports 1..30 players");
  return std::size_t{1} << n;
}

void check_players(int n) {
  require(n >= 1 && n <= kMaxShapleyClients, ErrorCode::kInvalidArgument,
          "shapley: player count must lie in [1, " + std::to_string(kMaxShapleyClients) + "]");
}

// Turns one round's values into non-negative raw scores per the mode.
std::vector<double> non_negative(std::span<const double> raw, NormalizationMode mode) {
  std::vector<double> out(raw.begin(), raw.end());
  if (mode == NormalizationMode::kClamp) {
    for (double& x : out) x = std::max(0.0, x);
  } else {
    const double lo = *std::min_element(out.begin(), out.end());
    for (double& x : out) x -= lo;
  }
  return out;
}

std::vector<double> to_shares(std::span<const double> raw, NormalizationMode mode) {
  std::vector<double> c = non_negative(raw, mode);
  const double total = std::accumulate(c.begin(), c.end(), 0.0);
  if (!(total > 0.0)) return std::vector<double>(c.size(), 1.0 / static_cast<double>(c.size()));
  for (double& x : c) x /= total;
  return c;
}

}  // namespace

RoundValueTable::RoundValueTable(int num_players)
    : num_players_(num_players),
      values_(table_size(num_players), 0.0),
      known_(table_size(num_players), 0) {}

void RoundValueTable::set(SubsetMask subset, double value) {
  require(subset < values_.size(), ErrorCode::kInvalidArgument, "value table: subset out of range");
  values_[subset] = value;
  known_[subset] = 1;
}

bool RoundValueTable::has(SubsetMask subset) const {
  return subset < values_.size() && known_[subset] != 0;
}

double RoundValueTable::get(SubsetMask subset) const {
  require(has(subset), ErrorCode::kInvalidArgument,
          "value table: no entry for subset " + std::to_string(subset));
  return values_[subset];
}

bool RoundValueTable::complete() const {
  return std::all_of(known_.begin(), known_.end(), [](unsigned char k) { return k != 0; });
}

void ShapleyConfig::validate() const {
  require(mc_perms >= 1, ErrorCode::kInvalidArgument, "mc_perms must be >= 1");
  require(exact_cap >= 1 && exact_cap <= 30, ErrorCode::kInvalidArgument,
          "exact_cap must lie in [1, 30]");
}

RoundShapley exact_shapley(const RoundValueTable& table, int n, int cap) {
  require(n <= cap, ErrorCode::kCapacity,
          "exact_shapley: " + std::to_string(n) + " clients exceeds the cap of " +
              std::to_string(cap));
  require(table.num_players() == n, ErrorCode::kDimensionMismatch,
          "exact_shapley: table player count differs from n");
  require(table.complete(), ErrorCode::kInvalidArgument, "exact_shapley: incomplete value table");

  // weight[s] = s! (n-s-1)! / n!; factorials up to 30! are accurate to ~1 ulp.
  std::vector<double> fact(static_cast<std::size_t>(n) + 1, 1.0);
  for (int k = 1; k <= n; ++k) fact[static_cast<std::size_t>(k)] = fact[static_cast<std::size_t>(k - 1)] * k;
  std::vector<double> weight(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    weight[static_cast<std::size_t>(s)] =
        fact[static_cast<std::size_t>(s)] * fact[static_cast<std::size_t>(n - s - 1)] /
        fact[static_cast<std::size_t>(n)];
  }

  RoundShapley out;
  out.phi.assign(static_cast<std::size_t>(n), 0.0);
  const SubsetMask full = (SubsetMask{1} << n) - 1;
  for (int i = 0; i < n; ++i) {
    const SubsetMask bit = SubsetMask{1} << i;
    double phi = 0.0;
    for (SubsetMask s = 0; s <= full; ++s) {
      if (s & bit) continue;
      phi += weight[static_cast<std::size_t>(std::popcount(s))] * (table.get(s | bit) - table.get(s));
    }
    out.phi[static_cast<std::size_t>(i)] = phi;
  }
  out.full_value = table.get(full);
  out.empty_value = table.get(0);
  return out;
}

RoundShapley mc_shapley(const ValueFn& value_fn, int n, int num_perms, std::uint64_t seed) {
  check_players(n);
  require(num_perms >= 1, ErrorCode::kInvalidArgument, "mc_shapley: num_perms must be >= 1");
  std::unordered_map<SubsetMask, double> memo;
  const auto v = [&](SubsetMask s) {
    auto [it, inserted] = memo.try_emplace(s, 0.0);
    if (inserted) it->second = value_fn(s);
    return it->second;
  };

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
  Rng rng(seed);
  for (int p = 0; p < num_perms; ++p) {
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    SubsetMask coalition = 0;
    double before = v(coalition);
    for (int player : perm) {
      coalition |= SubsetMask{1} << player;
      const double after = v(coalition);
      sum[static_cast<std::size_t>(player)] += after - before;
      before = after;
    }
  }
  RoundShapley out;
  out.phi.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < sum.size(); ++i) out.phi[i] = sum[i] / num_perms;
  out.full_value = v((SubsetMask{1} << n) - 1);
  out.empty_value = v(0);
  return out;
}

RoundShapley mc_shapley_all_permutations(const ValueFn& value_fn, int n) {
  require(n >= 1 && n <= 10, ErrorCode::kCapacity,
          "mc_shapley_all_permutations: n must lie in [1, 10]");
  std::unordered_map<SubsetMask, double> memo;
  const auto v = [&](SubsetMask s) {
    auto [it, inserted] = memo.try_emplace(s, 0.0);
    if (inserted) it->second = value_fn(s);
    return it->second;
  };
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
  long long count = 0;
  do {
    SubsetMask coalition = 0;
    double before = v(coalition);
    for (int player : perm) {
      coalition |= SubsetMask{1} << player;
      const double after = v(coalition);
      sum[static_cast<std::size_t>(player)] += after - before;
      before = after;
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  RoundShapley out;
  out.phi.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < sum.size(); ++i) out.phi[i] = sum[i] / static_cast<double>(count);
  out.full_value = v((SubsetMask{1} << n) - 1);
  out.empty_value = v(0);
  return out;
}

double reconstruct_utility(const ModelArch& arch, const ParamVec& prev_global,
                           std::span<const ClientUpdate> updates, SubsetMask subset,
                           const Dataset& val_set, UtilityKind utility) {
  require(!val_set.empty(), ErrorCode::kInvalidArgument,
          "reconstruct_utility: empty validation set");
  require(updates.size() <= static_cast<std::size_t>(kMaxShapleyClients) &&
              (subset >> updates.size()) == 0,
          ErrorCode::kInvalidArgument, "reconstruct_utility: subset names unknown clients");

  const auto utility_of = [&](const ParamVec& params) {
    const EvalResult r = evaluate(arch, params, val_set);
    return utility == UtilityKind::kAccuracy ? r.accuracy : -r.loss;
  };
  if (subset == 0) return utility_of(prev_global);

  std::vector<ParamVec> members;
  std::vector<double> weights;
  std::vector<int> ids;
  double total = 0.0;
  for (std::size_t i = 0; i < updates.size(); ++i) {
    if (!(subset & (SubsetMask{1} << i))) continue;
    members.push_back(updates[i].params);
    weights.push_back(static_cast<double>(updates[i].num_examples));
    ids.push_back(updates[i].client_id);
    total += static_cast<double>(updates[i].num_examples);
  }
  for (double& w : weights) w /= total;
  return utility_of(weighted_sum(members, weights, ids));
}

ReconstructionGame::ReconstructionGame(const ModelArch& arch, const ParamVec& prev_global,
                                       std::span<const ClientUpdate> updates,
                                       const Dataset& val_set, UtilityKind utility)
    : arch_(arch),
      prev_global_(prev_global),
      updates_(updates.begin(), updates.end()),
      val_set_(val_set),
      utility_(utility) {
  require(!updates_.empty(), ErrorCode::kInvalidArgument, "shapley: no client updates");
  check_players(num_players());
  std::stable_sort(updates_.begin(), updates_.end(),
                   [](const ClientUpdate& a, const ClientUpdate& b) {
                     return a.client_id < b.client_id;
                   });
}

double ReconstructionGame::value(SubsetMask subset) {
  auto [it, inserted] = cache_.try_emplace(subset, 0.0);
  if (inserted) {
    it->second = reconstruct_utility(arch_, prev_global_, updates_, subset, val_set_, utility_);
  }
  return it->second;
}

RoundValueTable ReconstructionGame::eager_table() const {
  RoundValueTable table(num_players());
  const SubsetMask count = SubsetMask{1} << num_players();
  for (SubsetMask s = 0; s < count; ++s) {
    table.set(s, reconstruct_utility(arch_, prev_global_, updates_, s, val_set_, utility_));
  }
  return table;
}

RoundShapley round_shapley(const ModelArch& arch, const ParamVec& prev_global,
                           std::span<const ClientUpdate> updates, const Dataset& val_set,
                           const ShapleyConfig& cfg, std::uint64_t seed, int round_index) {
  cfg.validate();
  ReconstructionGame game(arch, prev_global, updates, val_set, cfg.utility);
  const int n = game.num_players();
  RoundShapley out;
  if (cfg.mode == ShapleyMode::kExact) {
    require(n <= cfg.exact_cap, ErrorCode::kCapacity,
            "round_shapley: " + std::to_string(n) + " clients exceeds the exact cap of " +
                std::to_string(cfg.exact_cap));
    RoundValueTable table(n);
    const SubsetMask count = SubsetMask{1} << n;
    for (SubsetMask s = 0; s < count; ++s) table.set(s, game.value(s));
    out = exact_shapley(table, n, cfg.exact_cap);
  } else {
    out = mc_shapley([&](SubsetMask s) { return game.value(s); }, n, cfg.mc_perms, seed);
  }
  out.round_index = round_index;
  return out;
}

ContributionVector accumulate_normalize(std::span<const RoundShapley> rounds,
                                        const ShapleyConfig& cfg) {
  require(!rounds.empty(), ErrorCode::kInvalidArgument, "accumulate_normalize: no rounds");
  const std::size_t n = rounds.front().phi.size();
  require(n >= 1, ErrorCode::kInvalidArgument, "accumulate_normalize: no clients");
  std::vector<double> raw(n, 0.0);
  for (const RoundShapley& r : rounds) {
    require(r.phi.size() == n, ErrorCode::kDimensionMismatch,
            "accumulate_normalize: inconsistent client counts across rounds");
    if (cfg.per_round_normalize) {
      const std::vector<double> shares = to_shares(r.phi, cfg.normalization);
      for (std::size_t i = 0; i < n; ++i) raw[i] += shares[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) raw[i] += r.phi[i];
    }
  }
  return ContributionVector::from_shares(to_shares(raw, cfg.normalization));
}

}  // namespace fedsim
