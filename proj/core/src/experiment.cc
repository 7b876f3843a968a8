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
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "fedsim/error.h"
#include "fedsim/format.h"
#include "fedsim/idx.h"
#include "fedsim/random.h"

namespace fedsim {
namespace {

std::string_view model_kind_name(ModelKind kind) {
  return kind == ModelKind::kLogistic ? "logistic" : "mlp1";
}

std::uint64_t hash_u64(std::uint64_t h, std::uint64_t value) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  return fnv1a64(std::string_view(bytes, 8), h);
}

std::uint64_t partition_digest_of(const std::vector<ClientDataset>& clients) {
  std::uint64_t h = fnv1a64("");
  for (const ClientDataset& c : clients) {
    h = hash_u64(h, static_cast<std::uint64_t>(c.client_id));
    h = hash_u64(h, c.source_indices.size());
    for (std::size_t i : c.source_indices) h = hash_u64(h, i);
  }
  return h;
}

SampleSet assemble(std::vector<RunRecord> runs) {
  SampleSet set;
  set.runs = std::move(runs);
  for (const RunRecord& r : set.runs) set.samples.push_back(r.contributions);
  set.mean = mean_contribution(set.samples);
  return set;
}

void check_shared_inputs(const SampleSet& set, const char* method) {
  for (const RunRecord& r : set.runs) {
    require(r.partition_digest == set.runs.front().partition_digest &&
                r.client_seed_digest == set.runs.front().client_seed_digest,
            ErrorCode::kInvalidArgument,
            std::string(method) + ": runs did not share partition and client seeds");
  }
}

std::string alpha_label(double alpha) {
  std::string s = format_double(alpha);
  std::replace(s.begin(), s.end(), '.', 'p');
  std::replace(s.begin(), s.end(), '+', '_');
  return s;
}

}  // namespace

Dataset DatasetSpec::materialize() const {
  Dataset ds;
  if (source == DatasetSource::kSynthetic) {
    ds = gen_synthetic(synthetic);
  } else {
    ds = load_idx(images_path, labels_path);
    if (max_records > 0 && max_records < ds.size()) {
      std::vector<std::size_t> keep(max_records);
      for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
      const int classes = ds.num_classes;
      ds = ds.subset(keep);
      ds.num_classes = classes;
    }
  }
  ds.validate();
  return ds;
}

void FederationConfig::validate() const {
  arch.validate();
  local.validate();
  hyper.validate();
  shapley.validate();
  require(rounds >= 1, ErrorCode::kInvalidArgument, "rounds must be >= 1");
  require(val_frac > 0.0 && val_frac < 1.0, ErrorCode::kInvalidArgument,
          "val_frac must lie in (0, 1)");
  require(partition.num_clients >= 1, ErrorCode::kInvalidArgument,
          "partition.num_clients must be >= 1");
  require(strategy != StrategyKind::kFedRandom || !fedrandom_pool.empty(),
          ErrorCode::kInvalidArgument, "fedrandom_pool must not be empty");
  for (StrategyKind k : fedrandom_pool) {
    require(k != StrategyKind::kFedRandom, ErrorCode::kInvalidArgument,
            "fedrandom_pool cannot contain FedRandom");
  }
}

std::string canonical_description(const FederationConfig& cfg) {
  std::ostringstream out;
  const auto line = [&](std::string_view key, const auto& value) {
    out << key << '=' << value << '\n';
  };
  const auto num = [](double v) { return format_double(v); };
  line("dataset.name", cfg.dataset.name);
  line("dataset.source", cfg.dataset.source == DatasetSource::kSynthetic ? "synthetic" : "idx");
  line("dataset.num_classes", cfg.dataset.synthetic.num_classes);
  line("dataset.input_dim", cfg.dataset.synthetic.input_dim);
  line("dataset.per_class_count", cfg.dataset.synthetic.per_class_count);
  line("dataset.noise_sigma", num(cfg.dataset.synthetic.noise_sigma));
  line("dataset.seed", cfg.dataset.synthetic.seed);
  line("dataset.images_path", cfg.dataset.images_path);
  line("dataset.labels_path", cfg.dataset.labels_path);
  line("dataset.max_records", cfg.dataset.max_records);
  line("arch.kind", model_kind_name(cfg.arch.kind));
  line("arch.input_dim", cfg.arch.input_dim);
  line("arch.hidden_dim", cfg.arch.hidden_dim);
  line("arch.num_classes", cfg.arch.num_classes);
  line("rounds", cfg.rounds);
  line("local.epochs", cfg.local.local_epochs);
  line("local.learning_rate", num(cfg.local.learning_rate));
  line("local.batch_size", cfg.local.batch_size);
  line("strategy", strategy_name(cfg.strategy));
  for (StrategyKind k : cfg.fedrandom_pool) line("fedrandom_pool", strategy_name(k));
  line("hyper.server_lr", cfg.hyper.server_lr ? num(*cfg.hyper.server_lr) : "default");
  line("hyper.beta1", num(cfg.hyper.beta1));
  line("hyper.beta2", num(cfg.hyper.beta2));
  line("hyper.tau", num(cfg.hyper.tau));
  line("hyper.momentum", num(cfg.hyper.momentum));
  line("hyper.trim_frac", num(cfg.hyper.trim_frac));
  line("hyper.krum_f", cfg.hyper.krum_f);
  line("hyper.fedrandom_state",
       cfg.hyper.fedrandom_state == MemberStateMode::kPersistent ? "persistent" : "reset");
  line("shapley.mode", cfg.shapley.mode == ShapleyMode::kExact ? "exact" : "mc");
  line("shapley.mc_perms", cfg.shapley.mc_perms);
  line("shapley.utility", cfg.shapley.utility == UtilityKind::kAccuracy ? "accuracy" : "neg_loss");
  line("shapley.normalization",
       cfg.shapley.normalization == NormalizationMode::kClamp ? "clamp" : "shift_min");
  line("shapley.per_round_normalize", cfg.shapley.per_round_normalize ? "true" : "false");
  line("shapley.exact_cap", cfg.shapley.exact_cap);
  line("partition.num_clients", cfg.partition.num_clients);
  line("partition.alpha", num(cfg.partition.alpha));
  line("partition.seed", cfg.partition.seed);
  line("partition.min_shard", cfg.partition.min_shard);
  line("val_frac", num(cfg.val_frac));
  line("master_seed", cfg.master_seed);
  line("strategy_seed", cfg.effective_strategy_seed());
  return out.str();
}

std::uint64_t client_train_seed(std::uint64_t master_seed, int round_index, int client_id) {
  return derive_seed(
      derive_seed(derive_seed(master_seed, kStreamTrain), static_cast<std::uint64_t>(round_index)),
      static_cast<std::uint64_t>(client_id));
}

FederationData prepare_data(const FederationConfig& cfg, const Dataset& full) {
  require(full.input_dim == cfg.arch.input_dim, ErrorCode::kDimensionMismatch,
          "dataset input_dim " + std::to_string(full.input_dim) +
              " does not match arch.input_dim " + std::to_string(cfg.arch.input_dim));
  require(full.num_classes <= cfg.arch.num_classes, ErrorCode::kDimensionMismatch,
          "dataset has more classes than the model outputs");
  HoldoutSplit split =
      holdout_split(full, cfg.val_frac, derive_seed(cfg.master_seed, kStreamHoldout));
  FederationData data;
  data.validation = std::move(split.validation);
  data.clients = dirichlet_partition(split.train, cfg.partition);
  data.truth = ground_truth_sizes(data.clients);
  data.partition_digest = partition_digest_of(data.clients);
  return data;
}

std::vector<double> RunRecord::accuracy_trace() const {
  std::vector<double> trace;
  trace.reserve(rounds.size());
  for (const RoundRecord& r : rounds) trace.push_back(r.accuracy);
  return trace;
}

std::vector<StrategyKind> RunRecord::choice_sequence() const {
  std::vector<StrategyKind> seq;
  seq.reserve(rounds.size());
  for (const RoundRecord& r : rounds) seq.push_back(r.strategy);
  return seq;
}

RunRecord run_federation(const FederationConfig& cfg) {
  cfg.validate();
  return run_federation(cfg, prepare_data(cfg, cfg.dataset.materialize()));
}

RunRecord run_federation(const FederationConfig& cfg, const FederationData& data) {
  cfg.validate();
  RunRecord record;
  record.config_digest = fnv1a64(canonical_description(cfg));
  record.partition_digest = data.partition_digest;
  record.strategy = cfg.strategy;
  record.strategy_seed = cfg.effective_strategy_seed();
  record.ground_truth = data.truth.shares;
  for (const ClientDataset& c : data.clients) record.client_sizes.push_back(c.size());

  ParamVec global = init_params(cfg.arch, derive_seed(cfg.master_seed, kStreamInit));
  record.initial_accuracy = evaluate(cfg.arch, global, data.validation).accuracy;

  ServerAggregator server(cfg.strategy, cfg.hyper, cfg.effective_strategy_seed(),
                          cfg.fedrandom_pool);
  const std::uint64_t shapley_base = derive_seed(cfg.master_seed, kStreamShapley);
  std::uint64_t seed_digest = fnv1a64("");
  std::vector<RoundShapley> valuations;
  std::vector<ClientUpdate> updates(data.clients.size());

  for (int t = 1; t <= cfg.rounds; ++t) {
    for (std::size_t i = 0; i < data.clients.size(); ++i) {
      const ClientDataset& client = data.clients[i];
      LocalTrainConfig local = cfg.local;
      local.seed = client_train_seed(cfg.master_seed, t, client.client_id);
      seed_digest = hash_u64(seed_digest, local.seed);
      updates[i] = ClientUpdate{client.client_id,
                                train_local(cfg.arch, global, client.data, local), client.size()};
    }
    RoundRecord round;
    round.round = t;
    round.shapley = round_shapley(cfg.arch, global, updates, data.validation, cfg.shapley,
                                  derive_seed(shapley_base, static_cast<std::uint64_t>(t)), t);
    try {
      ServerAggregator::Step step = server.step(global, updates, static_cast<std::uint64_t>(t));
      global = std::move(step.global);
      round.strategy = step.applied;
    } catch (const Error& e) {
      fail(e.code(), "round " + std::to_string(t) + ": " + e.what());
    }
    const EvalResult eval = evaluate(cfg.arch, global, data.validation);
    round.accuracy = eval.accuracy;
    round.loss = eval.loss;
    valuations.push_back(round.shapley);
    record.rounds.push_back(std::move(round));
  }
  record.client_seed_digest = seed_digest;
  record.contributions = accumulate_normalize(valuations, cfg.shapley);
  return record;
}

SampleSet run_msm(const FederationConfig& cell, const FederationData& data,
                  const std::vector<StrategyKind>& pool) {
  require(!pool.empty(), ErrorCode::kInvalidArgument, "run_msm: empty strategy pool");
  std::vector<RunRecord> runs;
  for (StrategyKind kind : pool) {
    require(kind != StrategyKind::kFedRandom, ErrorCode::kInvalidArgument,
            "run_msm: FedRandom is not an MSM pool member");
    runs.push_back(run_federation(msm_member_config(cell, kind), data));
  }
  SampleSet set = assemble(std::move(runs));
  check_shared_inputs(set, "run_msm");
  return set;
}

std::uint64_t fedrandom_run_seed(std::uint64_t cell_seed, int run_index) {
  return splitmix64(cell_seed ^ static_cast<std::uint64_t>(run_index));
}

FederationConfig msm_member_config(const FederationConfig& cell, StrategyKind kind) {
  FederationConfig cfg = cell;
  cfg.strategy = kind;
  cfg.strategy_seed.reset();
  return cfg;
}

FederationConfig fedrandom_member_config(const FederationConfig& cell, int run_index) {
  FederationConfig cfg = cell;
  cfg.strategy = StrategyKind::kFedRandom;
  cfg.strategy_seed = fedrandom_run_seed(cell.master_seed, run_index);
  return cfg;
}


SampleSet run_fedrandom_samples(const FederationConfig& cell, const FederationData& data,
                                int runs) {
  require(runs >= 1, ErrorCode::kInvalidArgument, "run_fedrandom_samples: K must be >= 1");
  std::vector<RunRecord> records;
  for (int k = 0; k < runs; ++k) {
    records.push_back(run_federation(fedrandom_member_config(cell, k), data));
  }
  SampleSet set = assemble(std::move(records));
  check_shared_inputs(set, "run_fedrandom_samples");
  return set;
}

void ScenarioConfig::validate() const {
  require(!datasets.empty() && !alphas.empty() && !epochs.empty() && !seeds.empty(),
          ErrorCode::kInvalidArgument, "scenario grid must not be empty");
  require(!msm_pool.empty(), ErrorCode::kInvalidArgument, "msm_pool must not be empty");
  require(fedrandom_runs >= 1, ErrorCode::kInvalidArgument, "fedrandom_runs must be >= 1");
  for (double a : alphas) {
    require(a > 0.0 && std::isfinite(a), ErrorCode::kInvalidArgument, "alpha must be positive");
  }
  for (int e : epochs) require(e >= 1, ErrorCode::kInvalidArgument, "epochs must be >= 1");
  std::vector<std::string> names;
  for (const DatasetSpec& d : datasets) names.push_back(d.name);
  std::sort(names.begin(), names.end());
  require(std::adjacent_find(names.begin(), names.end()) == names.end(),
          ErrorCode::kInvalidArgument, "dataset names must be unique");
  base.validate();
}

ScenarioConfig default_desk_scenario() {
  ScenarioConfig s;
  DatasetSpec ds;
  ds.name = "synthetic4";
  ds.synthetic = SyntheticSpec{4, 8, 250, 1.5, 7};
  s.datasets = {ds};
  s.alphas = {1.0, 10.0, 100.0};
  s.epochs = {1, 2};
  s.seeds = {0, 1, 2};
  s.fedrandom_runs = 10;
  s.master_seed = 42;
  FederationConfig& b = s.base;
  b.dataset = ds;
  b.arch = ModelArch{ModelKind::kLogistic, 8, 16, 4};
  b.rounds = 20;
  b.local = LocalTrainConfig{1, 0.05, 16, 0};
  b.partition = PartitionSpec{5, 1.0, 0, 8};
  b.val_frac = 0.2;
  return s;
}

std::vector<ScenarioCell> expand_grid(const ScenarioConfig& scenario) {
  std::vector<ScenarioCell> cells;
  for (const DatasetSpec& ds : scenario.datasets) {
    for (int e : scenario.epochs) {
      for (double alpha : scenario.alphas) {
        for (std::uint64_t seed : scenario.seeds) {
          ScenarioCell cell;
          cell.index = cells.size();
          cell.dataset = ds.name;
          cell.alpha = alpha;
          cell.epochs = e;
          cell.seed = seed;
          cell.id = ds.name + "_e" + std::to_string(e) + "_a" + alpha_label(alpha) + "_s" +
                    std::to_string(seed);
          FederationConfig& cfg = cell.config;
          cfg = scenario.base;
          cfg.dataset = ds;
          cfg.local.local_epochs = e;
          cfg.partition.alpha = alpha;
          cfg.master_seed = splitmix64(scenario.master_seed ^ seed);
          cfg.partition.seed = derive_seed(cfg.master_seed, kStreamPartition);
          cfg.strategy = StrategyKind::kFedAvg;
          cfg.strategy_seed.reset();
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

ScenarioResult run_scenario(const ScenarioConfig& scenario, int workers) {
  scenario.validate();
  const std::vector<ScenarioCell> cells = expand_grid(scenario);

  std::map<std::string, Dataset> datasets;
  for (const DatasetSpec& ds : scenario.datasets) datasets.emplace(ds.name, ds.materialize());
  std::vector<FederationData> cell_data;
  cell_data.reserve(cells.size());
  for (const ScenarioCell& cell : cells) {
    try {
      cell_data.push_back(prepare_data(cell.config, datasets.at(cell.dataset)));
    } catch (const Error& e) {
      fail(e.code(), "cell " + cell.id + ": " + e.what());
    }
  }

  // Job j of a cell: j < |msm_pool| is an MSM member, the rest FedRandom runs.
  const std::size_t msm_n = scenario.msm_pool.size();
  const std::size_t per_cell = msm_n + static_cast<std::size_t>(scenario.fedrandom_runs);
  const std::size_t total_jobs = cells.size() * per_cell;
  std::vector<RunRecord> results(total_jobs);
  std::vector<std::exception_ptr> errors(total_jobs);
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t job = next.fetch_add(1); job < total_jobs; job = next.fetch_add(1)) {
      const std::size_t c = job / per_cell;
      const std::size_t j = job % per_cell;
      try {
        const FederationConfig cfg =
            j < msm_n ? msm_member_config(cells[c].config, scenario.msm_pool[j])
                      : fedrandom_member_config(cells[c].config, static_cast<int>(j - msm_n));
        results[job] = run_federation(cfg, cell_data[c]);
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };
  const auto threads =
      static_cast<std::size_t>(std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(total_jobs, 1))));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  for (std::size_t job = 0; job < total_jobs; ++job) {
    if (!errors[job]) continue;
    const ScenarioCell& cell = cells[job / per_cell];
    try {
      std::rethrow_exception(errors[job]);
    } catch (const Error& e) {
      fail(e.code(), "cell " + cell.id + ": " + e.what());
    }
  }

  ScenarioResult result;
  std::vector<CellReports> msm_reports, fr_reports;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellResult cr;
    cr.cell = cells[c];
    cr.truth = cell_data[c].truth;
    const auto first = results.begin() + static_cast<std::ptrdiff_t>(c * per_cell);
    cr.msm = assemble(std::vector<RunRecord>(
        std::make_move_iterator(first),
        std::make_move_iterator(first + static_cast<std::ptrdiff_t>(msm_n))));
    cr.fr = assemble(std::vector<RunRecord>(
        std::make_move_iterator(first + static_cast<std::ptrdiff_t>(msm_n)),
        std::make_move_iterator(first + static_cast<std::ptrdiff_t>(per_cell))));
    check_shared_inputs(cr.msm, "run_msm");
    check_shared_inputs(cr.fr, "run_fedrandom_samples");
    cr.msm_metrics = sample_metrics(cr.msm.samples, cr.truth);
    cr.fr_metrics = sample_metrics(cr.fr.samples, cr.truth);
    msm_reports.push_back(CellReports{cr.cell.id, cr.msm_metrics});
    fr_reports.push_back(CellReports{cr.cell.id, cr.fr_metrics});
    result.cells.push_back(std::move(cr));
  }
  result.summary = compare(msm_reports, fr_reports);
  return result;
}

}  // namespace fedsim
