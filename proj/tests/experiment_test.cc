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

#include "fedsim/experiment.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fedsim/error.h"
#include "fedsim/random.h"

namespace fedsim {
namespace {

FederationConfig small_config(StrategyKind kind = StrategyKind::kFedAvg) {
  FederationConfig cfg;
  cfg.dataset.synthetic = SyntheticSpec{4, 8, 60, 1.5, 7};
  cfg.rounds = 4;
  cfg.strategy = kind;
  cfg.partition = PartitionSpec{4, 1.0, 3, 4};
  return cfg;
}

void expect_same_record(const RunRecord& a, const RunRecord& b, bool same_labels = true) {
  EXPECT_EQ(a.partition_digest, b.partition_digest);
  EXPECT_EQ(a.client_seed_digest, b.client_seed_digest);
  EXPECT_EQ(a.client_sizes, b.client_sizes);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  EXPECT_EQ(a.initial_accuracy, b.initial_accuracy);
  ASSERT_EQ(a.rounds.size(), b.rounds.size());
  for (std::size_t t = 0; t < a.rounds.size(); ++t) {
    EXPECT_EQ(a.rounds[t].round, b.rounds[t].round);
    EXPECT_EQ(a.rounds[t].accuracy, b.rounds[t].accuracy);
    EXPECT_EQ(a.rounds[t].loss, b.rounds[t].loss);
    EXPECT_EQ(a.rounds[t].shapley.phi, b.rounds[t].shapley.phi);
    if (same_labels) EXPECT_EQ(a.rounds[t].strategy, b.rounds[t].strategy);
  }
  EXPECT_EQ(a.contributions, b.contributions);
  if (same_labels) {
    EXPECT_EQ(a.config_digest, b.config_digest);
    EXPECT_EQ(a.strategy, b.strategy);
  }
}

void expect_efficient(const RunRecord& r) {
  for (const RoundRecord& round : r.rounds) {
    const double sum = std::accumulate(round.shapley.phi.begin(), round.shapley.phi.end(), 0.0);
    EXPECT_LE(std::abs(sum - (round.shapley.full_value - round.shapley.empty_value)), 1e-9)
        << "round " << round.round;
  }
  EXPECT_TRUE(is_valid_contribution(r.contributions.values()));
}

TEST(FederationConfigTest, ValidationAndDescription) {
  FederationConfig cfg = small_config();
  EXPECT_NO_THROW(cfg.validate());
  const std::string base = canonical_description(cfg);
  FederationConfig other = cfg;
  other.hyper.tau = 2e-3;
  EXPECT_NE(canonical_description(other), base);
  other = cfg;
  other.strategy_seed = 5;
  EXPECT_NE(canonical_description(other), base);
  EXPECT_EQ(cfg.effective_strategy_seed(), cfg.master_seed);

  FederationConfig bad = cfg;
  bad.rounds = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.val_frac = 1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = cfg;
  bad.fedrandom_pool = {StrategyKind::kFedRandom};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(RunFederationTest, DeterministicAndEfficient) {
  for (StrategyKind kind : {StrategyKind::kFedAvg, StrategyKind::kFedYogi, StrategyKind::kKrum,
                            StrategyKind::kFedRandom}) {
    const FederationConfig cfg = small_config(kind);
    const RunRecord a = run_federation(cfg);
    const RunRecord b = run_federation(cfg);
    expect_same_record(a, b);
    expect_efficient(a);
    EXPECT_EQ(a.rounds.size(), 4u);
    EXPECT_EQ(a.accuracy_trace().size(), 4u);
    EXPECT_EQ(a.client_sizes.size(), 4u);
  }
}

TEST(RunFederationTest, SingleClientGetsEverything) {
  FederationConfig cfg = small_config();
  cfg.partition.num_clients = 1;
  const RunRecord r = run_federation(cfg);
  ASSERT_EQ(r.contributions.size(), 1u);
  EXPECT_EQ(r.contributions[0], 1.0);
}

TEST(RunFederationTest, IdenticalShardsSplitEvenly) {
  const Dataset full = gen_synthetic(SyntheticSpec{4, 8, 30, 1.5, 2});
  const HoldoutSplit split = holdout_split(full, 0.3, 9);
  FederationData data;
  data.validation = split.validation;
  // One repeated record per shard: shuffling cannot make the clients differ.
  const std::vector<std::size_t> rows(12, 0);
  for (int id = 0; id < 2; ++id) {
    ClientDataset c;
    c.client_id = id;
    c.data = split.train.subset(rows);
    c.source_indices = rows;
    data.clients.push_back(c);
  }
  const std::vector<std::size_t> sizes{12, 12};
  data.truth = ground_truth_sizes(std::span<const std::size_t>(sizes));
  FederationConfig cfg = small_config();
  cfg.rounds = 1;
  cfg.partition.num_clients = 2;
  const RunRecord r = run_federation(cfg, data);
  EXPECT_EQ(r.rounds[0].shapley.phi[0], r.rounds[0].shapley.phi[1]);
  EXPECT_EQ(r.contributions[0], 0.5);
  EXPECT_EQ(r.contributions[1], 0.5);
}

TEST(RunFederationTest, FedAvgOnlyPoolMatchesFedAvg) {
  FederationConfig fr = small_config(StrategyKind::kFedRandom);
  fr.fedrandom_pool = {StrategyKind::kFedAvg};
  const RunRecord a = run_federation(fr);
  const RunRecord b = run_federation(small_config(StrategyKind::kFedAvg));
  expect_same_record(a, b, /*same_labels=*/false);
  EXPECT_EQ(a.strategy, StrategyKind::kFedRandom);
  for (const RoundRecord& round : a.rounds) EXPECT_EQ(round.strategy, StrategyKind::kFedAvg);
}

TEST(RunFederationTest, AggregationErrorsCarryRoundContext) {
  FederationConfig cfg = small_config(StrategyKind::kKrum);
  cfg.hyper.krum_f = 3;  // 4 clients leave no Krum neighbours
  try {
    run_federation(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("round 1: ", 0), 0u) << e.what();
  }
}

TEST(RunFederationTest, MonteCarloModeIsSeededAndValid) {
  FederationConfig cfg = small_config();
  cfg.shapley.mode = ShapleyMode::kMonteCarlo;
  cfg.shapley.mc_perms = 20;
  const RunRecord a = run_federation(cfg);
  expect_same_record(a, run_federation(cfg));
  expect_efficient(a);
}

class SamplesTest : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg_ = small_config();
    data_ = prepare_data(cfg_, cfg_.dataset.materialize());
  }
  FederationConfig cfg_;
  FederationData data_;
};

TEST_F(SamplesTest, MsmRunsShareInputs) {
  const std::vector<StrategyKind> pool(kMsmPool.begin(), kMsmPool.end());
  const SampleSet s = run_msm(cfg_, data_, pool);
  ASSERT_EQ(s.runs.size(), 8u);
  ASSERT_EQ(s.samples.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(s.runs[i].strategy, pool[i]);
    EXPECT_EQ(s.runs[i].partition_digest, s.runs[0].partition_digest);
    EXPECT_EQ(s.runs[i].client_seed_digest, s.runs[0].client_seed_digest);
    EXPECT_EQ(s.samples[i], s.runs[i].contributions);
    expect_efficient(s.runs[i]);
  }
  const double total = std::accumulate(s.mean.values().begin(), s.mean.values().end(), 0.0);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(s.mean, mean_contribution(s.samples));
  EXPECT_THROW(run_msm(cfg_, data_, {StrategyKind::kFedRandom}), Error);
  EXPECT_EQ(run_msm(cfg_, data_, {StrategyKind::kFedAvg, StrategyKind::kKrum}).runs.size(), 2u);
}

TEST_F(SamplesTest, FedRandomSamples) {
  const SampleSet one = run_fedrandom_samples(cfg_, data_, 1);
  ASSERT_EQ(one.samples.size(), 1u);
  EXPECT_EQ(one.mean, one.samples[0]);
  const SampleSet a = run_fedrandom_samples(cfg_, data_, 3);
  const SampleSet b = run_fedrandom_samples(cfg_, data_, 3);
  EXPECT_EQ(a.samples, b.samples);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(a.runs[k].strategy_seed, fedrandom_run_seed(cfg_.master_seed, static_cast<int>(k)));
    EXPECT_EQ(a.runs[k].client_seed_digest, a.runs[0].client_seed_digest);
  }
  EXPECT_THROW(run_fedrandom_samples(cfg_, data_, 0), Error);
}

TEST_F(SamplesTest, ThirtyRunsGiveDistinctChoiceSequences) {
  FederationConfig cfg = cfg_;
  cfg.rounds = 20;
  const SampleSet s = run_fedrandom_samples(cfg, data_, 30);
  std::set<std::vector<StrategyKind>> distinct;
  for (const RunRecord& r : s.runs) {
    const auto seq = r.choice_sequence();
    EXPECT_EQ(seq.size(), 20u);
    for (StrategyKind k : seq) {
      EXPECT_NE(std::find(kFedRandomPool.begin(), kFedRandomPool.end(), k), kFedRandomPool.end());
    }
    distinct.insert(seq);
  }
  EXPECT_GE(distinct.size(), 25u);
}

TEST(PrepareDataTest, HoldoutAndPartition) {
  const FederationConfig cfg = small_config();
  const Dataset full = cfg.dataset.materialize();
  const FederationData d = prepare_data(cfg, full);
  std::size_t total = d.validation.size();
  for (const ClientDataset& c : d.clients) total += c.size();
  EXPECT_EQ(total, full.size());
  EXPECT_EQ(d.validation.size(), static_cast<std::size_t>(std::ceil(0.2 * full.size())));
  EXPECT_EQ(d.partition_digest, prepare_data(cfg, full).partition_digest);
  FederationConfig other = cfg;
  other.partition.seed = 99;
  EXPECT_NE(d.partition_digest, prepare_data(other, full).partition_digest);
}

TEST(ScenarioTest, DeskScenarioShape) {
  const ScenarioConfig s = default_desk_scenario();
  EXPECT_NO_THROW(s.validate());
  const std::vector<ScenarioCell> cells = expand_grid(s);
  ASSERT_EQ(cells.size(), 18u);
  EXPECT_EQ(cells[0].id, "synthetic4_e1_a1_s0");
  EXPECT_EQ(cells[1].id, "synthetic4_e1_a1_s1");
  EXPECT_EQ(cells[3].id, "synthetic4_e1_a10_s0");
  EXPECT_EQ(cells[9].id, "synthetic4_e2_a1_s0");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const ScenarioCell& c = cells[i];
    EXPECT_EQ(c.index, i);
    EXPECT_EQ(c.config.master_seed, splitmix64(42 ^ c.seed));
    EXPECT_EQ(c.config.partition.seed, derive_seed(c.config.master_seed, kStreamPartition));
    EXPECT_EQ(c.config.partition.alpha, c.alpha);
    EXPECT_EQ(c.config.local.local_epochs, c.epochs);
    EXPECT_EQ(c.config.rounds, 20);
    EXPECT_EQ(c.config.partition.num_clients, 5);
  }
  EXPECT_EQ(s.fedrandom_runs, 10);
}

TEST(ScenarioTest, ValidationRejectsBadGrids) {
  ScenarioConfig s = default_desk_scenario();
  s.alphas.clear();
  EXPECT_THROW(s.validate(), Error);
  s = default_desk_scenario();
  s.fedrandom_runs = 0;
  EXPECT_THROW(s.validate(), Error);
  s = default_desk_scenario();
  s.datasets.push_back(s.datasets.front());
  EXPECT_THROW(s.validate(), Error);
}

ScenarioConfig tiny_scenario() {
  ScenarioConfig s;
  s.datasets = {DatasetSpec{}};
  s.datasets[0].synthetic = SyntheticSpec{4, 8, 40, 1.5, 1};
  s.alphas = {1.0, 100.0};
  s.epochs = {1};
  s.seeds = {0, 1};
  s.base = small_config();
  s.base.rounds = 3;
  s.fedrandom_runs = 3;
  return s;
}

TEST(ScenarioTest, WorkerCountDoesNotChangeResults) {
  const ScenarioConfig s = tiny_scenario();
  const ScenarioResult serial = run_scenario(s, 1);
  const ScenarioResult parallel = run_scenario(s, 4);
  ASSERT_EQ(serial.cells.size(), 4u);
  ASSERT_EQ(parallel.cells.size(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(serial.cells[c].cell.id, parallel.cells[c].cell.id);
    EXPECT_EQ(serial.cells[c].msm.samples, parallel.cells[c].msm.samples);
    EXPECT_EQ(serial.cells[c].fr.samples, parallel.cells[c].fr.samples);
    EXPECT_EQ(serial.cells[c].msm_metrics.avg_std, parallel.cells[c].msm_metrics.avg_std);
    EXPECT_EQ(serial.cells[c].fr_metrics.l2, parallel.cells[c].fr_metrics.l2);
    EXPECT_EQ(serial.cells[c].msm.samples.size(), 8u);
    EXPECT_EQ(serial.cells[c].fr.samples.size(), 3u);
  }
  for (Criterion k : kCriteria) {
    EXPECT_EQ(serial.summary.at(k).wins, parallel.summary.at(k).wins);
    EXPECT_EQ(serial.summary.at(k).p_value, parallel.summary.at(k).p_value);
  }
}

TEST(ScenarioTest, CellFailuresNameTheCell) {
  ScenarioConfig s = tiny_scenario();
  s.base.partition.min_shard = 1000;
  try {
    run_scenario(s, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("cell synthetic4_e1_a1_s0"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace fedsim
