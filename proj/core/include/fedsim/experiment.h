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

#ifndef FEDSIM_EXPERIMENT_H_
#define FEDSIM_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/contribution.h"
#include "fedsim/data.h"
#include "fedsim/metrics.h"
#include "fedsim/model.h"
#include "fedsim/shapley.h"
#include "fedsim/strategies.h"

namespace fedsim {

enum class DatasetSource { kSynthetic, kIdx };

struct DatasetSpec {
  std::string name = "synthetic4";
  DatasetSource source = DatasetSource::kSynthetic;
  SyntheticSpec synthetic;
  std::string images_path;  // kIdx only
  std::string labels_path;  // kIdx only
  std::size_t max_records = 0;  // kIdx: keep the first N records; 0 keeps all

  Dataset materialize() const;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

// Everything that determines one federation. Seeds of all random consumers
// derive from master_seed (see random.h), except:
//   * partition.seed drives the Dirichlet split,
//   * strategy_seed (default: master_seed) drives FedRandom's per-round draw.
struct FederationConfig {
  DatasetSpec dataset;
  ModelArch arch;
  int rounds = 20;
  LocalTrainConfig local;  // local.seed is unused; client seeds derive from master_seed
  StrategyKind strategy = StrategyKind::kFedAvg;
  std::vector<StrategyKind> fedrandom_pool{kFedRandomPool.begin(), kFedRandomPool.end()};
  StrategyHyper hyper;
  ShapleyConfig shapley;
  PartitionSpec partition;
  double val_frac = 0.2;
  std::uint64_t master_seed = 42;
  std::optional<std::uint64_t> strategy_seed;

  void validate() const;
  std::uint64_t effective_strategy_seed() const { return strategy_seed.value_or(master_seed); }

  friend bool operator==(const FederationConfig&, const FederationConfig&) = default;
};

// Key=value rendering of every field of `cfg` in a fixed order; its FNV-1a
// hash is the config digest recorded in RunRecord.
std::string canonical_description(const FederationConfig& cfg);

std::uint64_t client_train_seed(std::uint64_t master_seed, int round_index, int client_id);

// Data side of a federation, shared by every run over the same cell.
struct FederationData {
  Dataset validation;
  std::vector<ClientDataset> clients;
  GroundTruth truth;
  std::uint64_t partition_digest = 0;
};

FederationData prepare_data(const FederationConfig& cfg, const Dataset& full);

struct RoundRecord {
  int round = 0;
  StrategyKind strategy = StrategyKind::kFedAvg;  // the rule actually applied
  double accuracy = 0.0;  // validation accuracy after aggregation
  double loss = 0.0;
  RoundShapley shapley;   // valued against the round's incoming global
};

struct RunRecord {
  std::uint64_t config_digest = 0;
  std::uint64_t partition_digest = 0;
  std::uint64_t client_seed_digest = 0;
  StrategyKind strategy = StrategyKind::kFedAvg;
  std::uint64_t strategy_seed = 0;
  std::vector<std::size_t> client_sizes;
  ContributionVector ground_truth;
  double initial_accuracy = 0.0;
  std::vector<RoundRecord> rounds;
  ContributionVector contributions;

  std::vector<double> accuracy_trace() const;
  std::vector<StrategyKind> choice_sequence() const;
};

// Runs the federation loop: each round every client trains from the current
// global (client-id order), the round is valued with Shapley, then the
// server aggregates.
RunRecord run_federation(const FederationConfig& cfg);
RunRecord run_federation(const FederationConfig& cfg, const FederationData& data);

struct SampleSet {
  std::vector<RunRecord> runs;
  std::vector<ContributionVector> samples;
  ContributionVector mean;
};

// One federation per pool member over the same data and client seeds.
SampleSet run_msm(const FederationConfig& cell, const FederationData& data,
                  const std::vector<StrategyKind>& pool);

std::uint64_t fedrandom_run_seed(std::uint64_t cell_seed, int run_index);

// The exact per-run configs used by run_msm and run_fedrandom_samples.
FederationConfig msm_member_config(const FederationConfig& cell, StrategyKind kind);
FederationConfig fedrandom_member_config(const FederationConfig& cell, int run_index);

// K FedRandom federations; run k uses strategy seed
// splitmix64(cell.master_seed XOR k). Data and client seeds are shared.
SampleSet run_fedrandom_samples(const FederationConfig& cell, const FederationData& data,
                                int runs);

struct ScenarioConfig {
  std::vector<DatasetSpec> datasets{DatasetSpec{}};
  std::vector<double> alphas{1.0, 10.0, 100.0};
  std::vector<int> epochs{1, 2};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  FederationConfig base;  // template; strategy/alpha/epochs/seeds are overridden per cell
  std::vector<StrategyKind> msm_pool{kMsmPool.begin(), kMsmPool.end()};
  int fedrandom_runs = 10;
  std::uint64_t master_seed = 42;

  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// The scaled-down default scenario: synthetic 4-class data, 5 clients,
// alpha in {1, 10, 100}, e in {1, 2}, seeds {0, 1, 2}, r = 20, K = 10.
ScenarioConfig default_desk_scenario();

struct ScenarioCell {
  std::size_t index = 0;
  std::string id;
  std::string dataset;
  double alpha = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;
  FederationConfig config;
};

// Grid expansion in dataset, epochs, alpha, seed order. A cell's master seed
// is splitmix64(master_seed XOR seed); its partition seed derives from that.
std::vector<ScenarioCell> expand_grid(const ScenarioConfig& scenario);

struct CellResult {
  ScenarioCell cell;
  GroundTruth truth;
  SampleSet msm;
  SampleSet fr;
  MetricsReport msm_metrics;
  MetricsReport fr_metrics;
};

struct ScenarioResult {
  std::vector<CellResult> cells;
  ComparisonSummary summary;
};

// Every federation of every cell is an independent job; `workers` threads
// execute them and results are merged in (cell, run) order, so the output
// does not depend on the worker count.
ScenarioResult run_scenario(const ScenarioConfig& scenario, int workers = 1);

}  // namespace fedsim

#endif  // FEDSIM_EXPERIMENT_H_
