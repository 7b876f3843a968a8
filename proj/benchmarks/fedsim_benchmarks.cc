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

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "fedsim/data.h"
#include "fedsim/experiment.h"
#include "fedsim/model.h"
#include "fedsim/random.h"
#include "fedsim/shapley.h"
#include "fedsim/strategies.h"

namespace fedsim {
namespace {

RoundValueTable random_table(int n) {
  Rng rng(static_cast<std::uint64_t>(n));
  RoundValueTable t(n);
  for (SubsetMask s = 0; s < (SubsetMask{1} << n); ++s) t.set(s, rng.uniform01());
  return t;
}

void BM_ExactShapleyTable(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RoundValueTable t = random_table(n);
  for (auto _ : state) benchmark::DoNotOptimize(exact_shapley(t, n));
}
BENCHMARK(BM_ExactShapleyTable)->DenseRange(4, 16, 4);

void BM_McShapleyTable(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RoundValueTable t = random_table(n);
  const ValueFn v = [&](SubsetMask s) { return t.get(s); };
  for (auto _ : state) benchmark::DoNotOptimize(mc_shapley(v, n, 200, 1));
}
BENCHMARK(BM_McShapleyTable)->DenseRange(4, 16, 4);

struct RoundFixture {
  ModelArch arch{ModelKind::kLogistic, 8, 16, 4};
  Dataset validation;
  ParamVec global;
  std::vector<ClientUpdate> updates;

  explicit RoundFixture(int clients) {
    const Dataset full = gen_synthetic(SyntheticSpec{4, 8, 250, 1.5, 7});
    const HoldoutSplit split = holdout_split(full, 0.2, 1);
    validation = split.validation;
    global = init_params(arch, 3);
    LocalTrainConfig cfg;
    for (const ClientDataset& c :
         dirichlet_partition(split.train, PartitionSpec{clients, 10.0, 2, 8})) {
      cfg.seed = static_cast<std::uint64_t>(c.client_id);
      updates.push_back(ClientUpdate{c.client_id, train_local(arch, global, c.data, cfg), c.size()});
    }
  }
};

// Full valuation of one round, including the 2^n coalition evaluations.
void BM_RoundShapley(benchmark::State& state) {
  const RoundFixture f(static_cast<int>(state.range(0)));
  ShapleyConfig cfg;
  cfg.mode = state.range(1) == 0 ? ShapleyMode::kExact : ShapleyMode::kMonteCarlo;
  cfg.mc_perms = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(round_shapley(f.arch, f.global, f.updates, f.validation, cfg, 1, 1));
  }
}
BENCHMARK(BM_RoundShapley)->ArgsProduct({{5, 8, 10}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Aggregate(benchmark::State& state) {
  const auto kind = static_cast<StrategyKind>(state.range(0));
  state.SetLabel(std::string(strategy_name(kind)));
  Rng rng(5);
  std::vector<ClientUpdate> updates;
  for (int i = 0; i < 10; ++i) {
    ParamVec p(1000);
    for (std::size_t k = 0; k < p.dim(); ++k) p[k] = rng.normal();
    updates.push_back(ClientUpdate{i, p, 50 + rng.below(50)});
  }
  const ParamVec global(1000, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(kind, {}, {}, global, updates));
}
BENCHMARK(BM_Aggregate)->DenseRange(0, static_cast<int>(StrategyKind::kKrum));

void BM_FederationRound(benchmark::State& state) {
  FederationConfig cfg = default_desk_scenario().base;
  cfg.rounds = 1;
  const FederationData data = prepare_data(cfg, cfg.dataset.materialize());
  for (auto _ : state) benchmark::DoNotOptimize(run_federation(cfg, data));
}
BENCHMARK(BM_FederationRound)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fedsim
BENCHMARK_MAIN();
