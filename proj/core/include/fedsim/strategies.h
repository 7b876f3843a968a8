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

#ifndef FEDSIM_STRATEGIES_H_
#define FEDSIM_STRATEGIES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fedsim/param_math.h"

namespace fedsim {

enum class StrategyKind {
  kFedAvg,
  kFedAvgM,
  kFedAdagrad,
  kFedAdam,
  kFedYogi,
  kFedMedian,
  kFedTrimmedAvg,
  kKrum,
  kFedRandom,
};

std::string_view strategy_name(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(std::string_view name);

// Pool sampled by FedRandom each round.
inline constexpr std::array<StrategyKind, 5> kFedRandomPool = {
    StrategyKind::kFedAvg, StrategyKind::kFedAvgM, StrategyKind::kFedAdagrad,
    StrategyKind::kFedAdam, StrategyKind::kFedYogi};

// One federation per member; their contributions are averaged (MSM).
inline constexpr std::array<StrategyKind, 8> kMsmPool = {
    StrategyKind::kFedAvg,    StrategyKind::kFedAvgM,       StrategyKind::kFedAdagrad,
    StrategyKind::kFedAdam,   StrategyKind::kFedYogi,       StrategyKind::kFedMedian,
    StrategyKind::kFedTrimmedAvg, StrategyKind::kKrum};

// How FedRandom treats the optimizer state of pool members between the
// rounds in which they are chosen.
enum class MemberStateMode { kPersistent, kReset };

struct StrategyHyper {
  // Unset means the per-kind default: 1.0 for FedAvgM, 0.1 for the adaptive
  // rules.
  std::optional<double> server_lr;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double tau = 1e-3;
  double momentum = 0.9;
  double trim_frac = 0.2;
  int krum_f = 0;
  MemberStateMode fedrandom_state = MemberStateMode::kPersistent;

  double server_lr_for(StrategyKind kind) const;
  void validate() const;

  friend bool operator==(const StrategyHyper&, const StrategyHyper&) = default;
};

struct StrategyState {
  std::optional<ParamVec> momentum;       // m_t
  std::optional<ParamVec> second_moment;  // v_t
  int round_counter = 0;

  friend bool operator==(const StrategyState&, const StrategyState&) = default;
};

struct ClientUpdate {
  int client_id = 0;
  ParamVec params;  // post-training local model
  std::size_t num_examples = 0;
};

// Size-weighted displacement from `global` toward the client models,
// sum_i (n_i / sum n) (params_i - global), accumulated in client-id order.
ParamVec pseudo_gradient(const ParamVec& global, std::span<const ClientUpdate> updates);

struct AggregateResult {
  ParamVec global;
  StrategyState state;
};

// One server step of `kind` (any kind except kFedRandom). Inputs are
// canonicalized by client id, so the result does not depend on update order.
AggregateResult aggregate(StrategyKind kind, const StrategyHyper& hyper,
                          const StrategyState& state, const ParamVec& global,
                          std::span<const ClientUpdate> updates);

// round_seed = splitmix64(run_seed XOR round_index)
std::uint64_t fedrandom_round_seed(std::uint64_t run_seed, std::uint64_t round_index);

// Uniform draw from `pool`, deterministic in round_seed.
StrategyKind fedrandom_choose(std::span<const StrategyKind> pool, std::uint64_t round_seed);

using MemberStates = std::map<StrategyKind, StrategyState>;

struct FedRandomResult {
  ParamVec global;
  MemberStates states;
  StrategyKind chosen = StrategyKind::kFedAvg;
};

// Draws a pool member for this round and applies it with that member's own
// state. Only the chosen member's state changes.
FedRandomResult fedrandom_aggregate(const StrategyHyper& hyper,
                                    std::span<const StrategyKind> pool,
                                    const MemberStates& states, const ParamVec& global,
                                    std::span<const ClientUpdate> updates,
                                    std::uint64_t round_seed);

// Stateful server wrapper used by the federation runner.
class ServerAggregator {
 public:
  // For kFedRandom, `pool` defaults to kFedRandomPool when empty.
  ServerAggregator(StrategyKind kind, StrategyHyper hyper, std::uint64_t run_seed,
                   std::vector<StrategyKind> pool = {});

  struct Step {
    ParamVec global;
    StrategyKind applied;
  };

  Step step(const ParamVec& global, std::span<const ClientUpdate> updates,
            std::uint64_t round_index);

  StrategyKind kind() const noexcept { return kind_; }

 private:
  StrategyKind kind_;
  StrategyHyper hyper_;
  std::uint64_t run_seed_;
  std::vector<StrategyKind> pool_;
  StrategyState state_;
  MemberStates member_states_;
};

}  // namespace fedsim

#endif  // FEDSIM_STRATEGIES_H_
