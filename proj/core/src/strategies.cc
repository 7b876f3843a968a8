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

#include "fedsim/strategies.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fedsim/error.h"
#include "fedsim/random.h"

namespace fedsim {
namespace {

constexpr double kMomentumServerLr = 1.0;
constexpr double kAdaptiveServerLr = 0.1;

// Updates sorted by client id; duplicate ids are rejected.
std::vector<ClientUpdate> canonical(const ParamVec& global,
                                    std::span<const ClientUpdate> updates) {
  require(!updates.empty(), ErrorCode::kInvalidArgument, "aggregate: no client updates");
  std::vector<ClientUpdate> sorted(updates.begin(), updates.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ClientUpdate& a, const ClientUpdate& b) {
                     return a.client_id < b.client_id;
                   });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    require(i == 0 || sorted[i].client_id != sorted[i - 1].client_id,
            ErrorCode::kInvalidArgument,
            "aggregate: duplicate client id " + std::to_string(sorted[i].client_id));
    require(sorted[i].num_examples > 0, ErrorCode::kInvalidArgument,
            "aggregate: client reported zero examples");
    require(sorted[i].params.dim() == global.dim(), ErrorCode::kDimensionMismatch,
            "aggregate: client parameter dimension differs from the global model");
    require(sorted[i].params.all_finite(), ErrorCode::kNonFinite,
            "aggregate: non-finite client parameters");
  }
  return sorted;
}

std::vector<double> size_weights(std::span<const ClientUpdate> sorted) {
  double total = 0.0;
  for (const ClientUpdate& u : sorted) total += static_cast<double>(u.num_examples);
  std::vector<double> w;
  w.reserve(sorted.size());
  for (const ClientUpdate& u : sorted) w.push_back(static_cast<double>(u.num_examples) / total);
  return w;
}

std::vector<ParamVec> params_of(std::span<const ClientUpdate> sorted) {
  std::vector<ParamVec> out;
  out.reserve(sorted.size());
  for (const ClientUpdate& u : sorted) out.push_back(u.params);
  return out;
}

ParamVec pseudo_gradient_sorted(const ParamVec& global, std::span<const ClientUpdate> sorted) {
  std::vector<ParamVec> deltas;
  deltas.reserve(sorted.size());
  for (const ClientUpdate& u : sorted) {
    std::vector<double> d(global.dim());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = u.params[k] - global[k];
    deltas.emplace_back(std::move(d));
  }
  return weighted_sum(deltas, size_weights(sorted));
}

ParamVec zeros_like(const ParamVec& v) { return ParamVec(v.dim(), 0.0); }

const ParamVec& state_or_zero(const std::optional<ParamVec>& slot, const ParamVec& zero) {
  if (!slot) return zero;
  require(slot->dim() == zero.dim(), ErrorCode::kDimensionMismatch,
          "aggregate: strategy state dimension differs from the global model");
  return *slot;
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

AggregateResult adaptive_step(StrategyKind kind, const StrategyHyper& hyper,
                              const StrategyState& state, const ParamVec& global,
                              const ParamVec& delta) {
  const ParamVec zero = zeros_like(global);
  const ParamVec& m_prev = state_or_zero(state.momentum, zero);
  const ParamVec& v_prev = state_or_zero(state.second_moment, zero);
  const double lr = hyper.server_lr_for(kind);
  const std::size_t d = global.dim();

  std::vector<double> m(d), v(d), next(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double g = delta[k];
    const double g2 = g * g;
    m[k] = hyper.beta1 * m_prev[k] + (1.0 - hyper.beta1) * g;
    switch (kind) {
      case StrategyKind::kFedAdagrad:
        v[k] = v_prev[k] + g2;
        break;
      case StrategyKind::kFedAdam:
        v[k] = hyper.beta2 * v_prev[k] + (1.0 - hyper.beta2) * g2;
        break;
      default:  // kFedYogi
        v[k] = v_prev[k] - (1.0 - hyper.beta2) * g2 * sign(v_prev[k] - g2);
        break;
    }
    next[k] = global[k] + lr * m[k] / (std::sqrt(v[k]) + hyper.tau);
  }
  AggregateResult out;
  out.global = ParamVec(std::move(next));
  out.state.momentum = ParamVec(std::move(m));
  out.state.second_moment = ParamVec(std::move(v));
  out.state.round_counter = state.round_counter + 1;
  return out;
}

ParamVec krum_select(const StrategyHyper& hyper, std::span<const ClientUpdate> sorted) {
  const auto m = static_cast<int>(sorted.size());
  const int neighbours = m - hyper.krum_f - 2;
  require(neighbours >= 1, ErrorCode::kInvalidArgument,
          "Krum needs m - f - 2 >= 1 (m=" + std::to_string(m) +
              ", f=" + std::to_string(hyper.krum_f) + ")");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> dists;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    dists.clear();
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      if (j == i) continue;
      const double dist = l2_dist(sorted[i].params, sorted[j].params);
      dists.push_back(dist * dist);
    }
    std::sort(dists.begin(), dists.end());
    double score = 0.0;
    for (int k = 0; k < neighbours; ++k) score += dists[static_cast<std::size_t>(k)];
    if (score < best_score) {  // strict: ties keep the lower client id
      best_score = score;
      best = i;
    }
  }
  return sorted[best].params;
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kFedAvg: return "FedAvg";
    case StrategyKind::kFedAvgM: return "FedAvgM";
    case StrategyKind::kFedAdagrad: return "FedAdagrad";
    case StrategyKind::kFedAdam: return "FedAdam";
    case StrategyKind::kFedYogi: return "FedYogi";
    case StrategyKind::kFedMedian: return "FedMedian";
    case StrategyKind::kFedTrimmedAvg: return "FedTrimmedAvg";
    case StrategyKind::kKrum: return "Krum";
    case StrategyKind::kFedRandom: return "FedRandom";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (StrategyKind kind :
       {StrategyKind::kFedAvg, StrategyKind::kFedAvgM, StrategyKind::kFedAdagrad,
        StrategyKind::kFedAdam, StrategyKind::kFedYogi, StrategyKind::kFedMedian,
        StrategyKind::kFedTrimmedAvg, StrategyKind::kKrum, StrategyKind::kFedRandom}) {
    if (strategy_name(kind) == name) return kind;
  }
  return std::nullopt;
}

double StrategyHyper::server_lr_for(StrategyKind kind) const {
  if (server_lr) return *server_lr;
  return kind == StrategyKind::kFedAvgM ? kMomentumServerLr : kAdaptiveServerLr;
}

void StrategyHyper::validate() const {
  const auto finite = [](double x) { return std::isfinite(x); };
  require(!server_lr || (finite(*server_lr) && *server_lr > 0.0),
          ErrorCode::kInvalidArgument, "server_lr must be positive");
  require(finite(beta1) && beta1 >= 0.0 && beta1 < 1.0, ErrorCode::kInvalidArgument,
          "beta1 must lie in [0, 1)");
  require(finite(beta2) && beta2 >= 0.0 && beta2 < 1.0, ErrorCode::kInvalidArgument,
          "beta2 must lie in [0, 1)");
  require(finite(tau) && tau > 0.0, ErrorCode::kInvalidArgument, "tau must be positive");
  require(finite(momentum) && momentum >= 0.0 && momentum < 1.0,
          ErrorCode::kInvalidArgument, "momentum must lie in [0, 1)");
  require(finite(trim_frac) && trim_frac >= 0.0 && trim_frac < 0.5,
          ErrorCode::kInvalidArgument, "trim_frac must lie in [0, 0.5)");
  require(krum_f >= 0, ErrorCode::kInvalidArgument, "krum_f must be >= 0");
}

ParamVec pseudo_gradient(const ParamVec& global, std::span<const ClientUpdate> updates) {
  return pseudo_gradient_sorted(global, canonical(global, updates));
}

AggregateResult aggregate(StrategyKind kind, const StrategyHyper& hyper,
                          const StrategyState& state, const ParamVec& global,
                          std::span<const ClientUpdate> updates) {
  require(kind != StrategyKind::kFedRandom, ErrorCode::kInvalidArgument,
          "aggregate: FedRandom is a meta-strategy; use fedrandom_aggregate");
  const std::vector<ClientUpdate> sorted = canonical(global, updates);

  AggregateResult out;
  out.state = state;
  switch (kind) {
    case StrategyKind::kFedAvg:
      out.global = weighted_sum(params_of(sorted), size_weights(sorted));
      break;
    case StrategyKind::kFedAvgM: {
      const ParamVec delta = pseudo_gradient_sorted(global, sorted);
      const ParamVec zero = zeros_like(global);
      const ParamVec& m_prev = state_or_zero(state.momentum, zero);
      const double lr = hyper.server_lr_for(kind);
      std::vector<double> m(global.dim()), next(global.dim());
      for (std::size_t k = 0; k < m.size(); ++k) {
        m[k] = hyper.momentum * m_prev[k] + delta[k];
        next[k] = global[k] + lr * m[k];
      }
      out.global = ParamVec(std::move(next));
      out.state.momentum = ParamVec(std::move(m));
      out.state.round_counter = state.round_counter + 1;
      break;
    }
    case StrategyKind::kFedAdagrad:
    case StrategyKind::kFedAdam:
    case StrategyKind::kFedYogi:
      out = adaptive_step(kind, hyper, state, global, pseudo_gradient_sorted(global, sorted));
      break;
    case StrategyKind::kFedMedian:
      out.global = coord_median(params_of(sorted));
      break;
    case StrategyKind::kFedTrimmedAvg:
      out.global = coord_trimmed_mean(params_of(sorted), hyper.trim_frac);
      break;
    case StrategyKind::kKrum:
      out.global = krum_select(hyper, sorted);
      break;
    case StrategyKind::kFedRandom:
      break;
  }
  require(out.global.all_finite(), ErrorCode::kNonFinite,
          std::string("aggregate: ") + std::string(strategy_name(kind)) +
              " produced non-finite parameters");
  return out;
}

std::uint64_t fedrandom_round_seed(std::uint64_t run_seed, std::uint64_t round_index) {
  return derive_seed(run_seed, round_index);
}

StrategyKind fedrandom_choose(std::span<const StrategyKind> pool, std::uint64_t round_seed) {
  require(!pool.empty(), ErrorCode::kInvalidArgument, "fedrandom_choose: empty pool");
  Rng rng(round_seed);
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

FedRandomResult fedrandom_aggregate(const StrategyHyper& hyper,
                                    std::span<const StrategyKind> pool,
                                    const MemberStates& states, const ParamVec& global,
                                    std::span<const ClientUpdate> updates,
                                    std::uint64_t round_seed) {
  for (StrategyKind kind : pool) {
    require(kind != StrategyKind::kFedRandom, ErrorCode::kInvalidArgument,
            "fedrandom_aggregate: FedRandom cannot be its own pool member");
  }
  FedRandomResult out;
  out.chosen = fedrandom_choose(pool, round_seed);
  out.states = states;
  StrategyState member;
  if (hyper.fedrandom_state == MemberStateMode::kPersistent) {
    if (const auto it = states.find(out.chosen); it != states.end()) member = it->second;
  }
  AggregateResult step = aggregate(out.chosen, hyper, member, global, updates);
  out.global = std::move(step.global);
  out.states[out.chosen] = std::move(step.state);
  return out;
}

ServerAggregator::ServerAggregator(StrategyKind kind, StrategyHyper hyper,
                                   std::uint64_t run_seed, std::vector<StrategyKind> pool)
    : kind_(kind), hyper_(std::move(hyper)), run_seed_(run_seed), pool_(std::move(pool)) {
  hyper_.validate();
  if (kind_ == StrategyKind::kFedRandom && pool_.empty()) {
    pool_.assign(kFedRandomPool.begin(), kFedRandomPool.end());
  }
}

ServerAggregator::Step ServerAggregator::step(const ParamVec& global,
                                              std::span<const ClientUpdate> updates,
                                              std::uint64_t round_index) {
  if (kind_ == StrategyKind::kFedRandom) {
    FedRandomResult r = fedrandom_aggregate(hyper_, pool_, member_states_, global, updates,
                                            fedrandom_round_seed(run_seed_, round_index));
    member_states_ = std::move(r.states);
    return Step{std::move(r.global), r.chosen};
  }
  AggregateResult r = aggregate(kind_, hyper_, state_, global, updates);
  state_ = std::move(r.state);
  return Step{std::move(r.global), kind_};
}

}  // namespace fedsim
