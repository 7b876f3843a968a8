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

#include "fedsim/config_io.h"

#include <limits>

#include "fedsim/error.h"

namespace fedsim::cli {
namespace {

Json seeds_to_json(std::uint64_t seed) { return Json(seed); }

Json pool_to_json(const std::vector<StrategyKind>& pool) {
  Json out = Json::array();
  for (StrategyKind k : pool) out.push_back(std::string(strategy_name(k)));
  return out;
}

std::vector<StrategyKind> pool_from_json(const ObjectReader& r, std::string_view key) {
  std::vector<StrategyKind> pool;
  const std::vector<std::string> names = r.string_array(key);
  for (std::size_t i = 0; i < names.size(); ++i) {
    pool.push_back(strategy_from_string(r, std::string(key) + "[" + std::to_string(i) + "]",
                                        names[i]));
  }
  return pool;
}

int narrow_int(const ObjectReader& r, std::string_view key, std::int64_t v) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    r.fail_at(key, "integer out of range");
  }
  return static_cast<int>(v);
}

std::size_t narrow_size(const ObjectReader& r, std::string_view key, std::int64_t v) {
  if (v < 0) r.fail_at(key, "expected non-negative integer");
  return static_cast<std::size_t>(v);
}

template <typename Enum>
Enum enum_from(const ObjectReader& r, std::string_view key, Enum fallback,
               std::initializer_list<std::pair<std::string_view, Enum>> options) {
  if (!r.has(key)) return fallback;
  const std::string value = r.get_string(key, "");
  std::string expected;
  for (const auto& [name, e] : options) {
    if (name == value) return e;
    expected += (expected.empty() ? "" : "|") + std::string(name);
  }
  r.fail_at(key, "expected one of " + expected + ", got \"" + value + "\"");
}

// Wraps library validation errors so they carry the document path.
template <typename F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig,
         "config error at " + (path.empty() ? std::string("<root>") : path) + ": " + e.what());
  }
}

}  // namespace

StrategyKind strategy_from_string(const ObjectReader& reader, std::string_view key,
                                  const std::string& name) {
  const auto kind = parse_strategy(name);
  if (!kind) reader.fail_at(key, "unknown strategy \"" + name + "\"");
  return *kind;
}

Json dataset_to_json(const DatasetSpec& spec) {
  Json j;
  j["name"] = spec.name;
  j["source"] = spec.source == DatasetSource::kSynthetic ? "synthetic" : "idx";
  j["num_classes"] = spec.synthetic.num_classes;
  j["input_dim"] = spec.synthetic.input_dim;
  j["per_class_count"] = spec.synthetic.per_class_count;
  j["noise_sigma"] = spec.synthetic.noise_sigma;
  j["seed"] = seeds_to_json(spec.synthetic.seed);
  j["images_path"] = spec.images_path;
  j["labels_path"] = spec.labels_path;
  j["max_records"] = spec.max_records;
  return j;
}

DatasetSpec dataset_from_json(const ObjectReader& r) {
  r.allow_only({"name", "source", "num_classes", "input_dim", "per_class_count", "noise_sigma",
                "seed", "images_path", "labels_path", "max_records"});
  DatasetSpec spec;
  spec.name = r.get_string("name", spec.name);
  spec.source = enum_from(r, "source", spec.source,
                          {{"synthetic", DatasetSource::kSynthetic}, {"idx", DatasetSource::kIdx}});
  SyntheticSpec& s = spec.synthetic;
  s.num_classes = narrow_int(r, "num_classes", r.get_int("num_classes", s.num_classes));
  s.input_dim = narrow_size(r, "input_dim",
                            r.get_int("input_dim", static_cast<std::int64_t>(s.input_dim)));
  s.per_class_count = narrow_size(
      r, "per_class_count", r.get_int("per_class_count", static_cast<std::int64_t>(s.per_class_count)));
  s.noise_sigma = r.get_double("noise_sigma", s.noise_sigma);
  s.seed = r.get_u64("seed", s.seed);
  spec.images_path = r.get_string("images_path", spec.images_path);
  spec.labels_path = r.get_string("labels_path", spec.labels_path);
  spec.max_records = narrow_size(
      r, "max_records", r.get_int("max_records", static_cast<std::int64_t>(spec.max_records)));
  if (spec.name.empty()) r.fail_at("name", "must not be empty");
  if (spec.source == DatasetSource::kIdx && (spec.images_path.empty() || spec.labels_path.empty())) {
    r.fail_at("images_path", "idx datasets need images_path and labels_path");
  }
  return spec;
}

Json config_to_json(const FederationConfig& cfg) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["dataset"] = dataset_to_json(cfg.dataset);
  j["arch"] = {{"kind", cfg.arch.kind == ModelKind::kLogistic ? "logistic" : "mlp1"},
               {"input_dim", cfg.arch.input_dim},
               {"hidden_dim", cfg.arch.hidden_dim},
               {"num_classes", cfg.arch.num_classes}};
  j["rounds"] = cfg.rounds;
  j["local"] = {{"epochs", cfg.local.local_epochs},
                {"learning_rate", cfg.local.learning_rate},
                {"batch_size", cfg.local.batch_size}};
  j["strategy"] = std::string(strategy_name(cfg.strategy));
  j["fedrandom_pool"] = pool_to_json(cfg.fedrandom_pool);
  Json hyper;
  hyper["server_lr"] = cfg.hyper.server_lr ? Json(*cfg.hyper.server_lr) : Json(nullptr);
  hyper["beta1"] = cfg.hyper.beta1;
  hyper["beta2"] = cfg.hyper.beta2;
  hyper["tau"] = cfg.hyper.tau;
  hyper["momentum"] = cfg.hyper.momentum;
  hyper["trim_frac"] = cfg.hyper.trim_frac;
  hyper["krum_f"] = cfg.hyper.krum_f;
  hyper["fedrandom_state"] =
      cfg.hyper.fedrandom_state == MemberStateMode::kPersistent ? "persistent" : "reset";
  j["hyper"] = hyper;
  j["shapley"] = {
      {"mode", cfg.shapley.mode == ShapleyMode::kExact ? "exact" : "mc"},
      {"mc_perms", cfg.shapley.mc_perms},
      {"utility", cfg.shapley.utility == UtilityKind::kAccuracy ? "accuracy" : "neg_loss"},
      {"normalization",
       cfg.shapley.normalization == NormalizationMode::kClamp ? "clamp" : "shift_min"},
      {"per_round_normalize", cfg.shapley.per_round_normalize},
      {"exact_cap", cfg.shapley.exact_cap}};
  j["partition"] = {{"num_clients", cfg.partition.num_clients},
                    {"alpha", cfg.partition.alpha},
                    {"seed", cfg.partition.seed},
                    {"min_shard", cfg.partition.min_shard}};
  j["val_frac"] = cfg.val_frac;
  j["master_seed"] = cfg.master_seed;
  j["strategy_seed"] = cfg.strategy_seed ? Json(*cfg.strategy_seed) : Json(nullptr);
  return j;
}

FederationConfig config_from_json(const Json& doc, const std::string& path) {
  const ObjectReader r(doc, path);
  r.allow_only({"schema_version", "dataset", "arch", "rounds", "local", "strategy",
                "fedrandom_pool", "hyper", "shapley", "partition", "val_frac", "master_seed",
                "strategy_seed"});
  if (r.has("schema_version") && r.get_int("schema_version", 0) != kSchemaVersion) {
    r.fail_at("schema_version", "unsupported version");
  }
  FederationConfig cfg;
  if (r.has("dataset")) cfg.dataset = dataset_from_json(r.object("dataset"));

  if (r.has("arch")) {
    const ObjectReader a = r.object("arch");
    a.allow_only({"kind", "input_dim", "hidden_dim", "num_classes"});
    cfg.arch.kind = enum_from(a, "kind", cfg.arch.kind,
                              {{"logistic", ModelKind::kLogistic}, {"mlp1", ModelKind::kMlp1}});
    cfg.arch.input_dim = narrow_size(
        a, "input_dim", a.get_int("input_dim", static_cast<std::int64_t>(cfg.arch.input_dim)));
    cfg.arch.hidden_dim = narrow_size(
        a, "hidden_dim", a.get_int("hidden_dim", static_cast<std::int64_t>(cfg.arch.hidden_dim)));
    cfg.arch.num_classes = narrow_int(a, "num_classes", a.get_int("num_classes", cfg.arch.num_classes));
    validated(r.key_path("arch"), [&] { cfg.arch.validate(); });
  }
  cfg.rounds = narrow_int(r, "rounds", r.get_int("rounds", cfg.rounds));
  if (cfg.rounds < 1) r.fail_at("rounds", "must be >= 1");

  if (r.has("local")) {
    const ObjectReader l = r.object("local");
    l.allow_only({"epochs", "learning_rate", "batch_size"});
    cfg.local.local_epochs = narrow_int(l, "epochs", l.get_int("epochs", cfg.local.local_epochs));
    cfg.local.learning_rate = l.get_double("learning_rate", cfg.local.learning_rate);
    cfg.local.batch_size = narrow_int(l, "batch_size", l.get_int("batch_size", cfg.local.batch_size));
    validated(r.key_path("local"), [&] { cfg.local.validate(); });
  }
  if (r.has("strategy")) {
    cfg.strategy = strategy_from_string(r, "strategy", r.get_string("strategy", ""));
  }
  if (r.has("fedrandom_pool")) cfg.fedrandom_pool = pool_from_json(r, "fedrandom_pool");

  if (r.has("hyper")) {
    const ObjectReader h = r.object("hyper");
    h.allow_only({"server_lr", "beta1", "beta2", "tau", "momentum", "trim_frac", "krum_f",
                  "fedrandom_state"});
    cfg.hyper.server_lr = h.get_optional_double("server_lr");
    cfg.hyper.beta1 = h.get_double("beta1", cfg.hyper.beta1);
    cfg.hyper.beta2 = h.get_double("beta2", cfg.hyper.beta2);
    cfg.hyper.tau = h.get_double("tau", cfg.hyper.tau);
    cfg.hyper.momentum = h.get_double("momentum", cfg.hyper.momentum);
    cfg.hyper.trim_frac = h.get_double("trim_frac", cfg.hyper.trim_frac);
    cfg.hyper.krum_f = narrow_int(h, "krum_f", h.get_int("krum_f", cfg.hyper.krum_f));
    cfg.hyper.fedrandom_state =
        enum_from(h, "fedrandom_state", cfg.hyper.fedrandom_state,
                  {{"persistent", MemberStateMode::kPersistent}, {"reset", MemberStateMode::kReset}});
    validated(r.key_path("hyper"), [&] { cfg.hyper.validate(); });
  }
  if (r.has("shapley")) {
    const ObjectReader s = r.object("shapley");
    s.allow_only({"mode", "mc_perms", "utility", "normalization", "per_round_normalize",
                  "exact_cap"});
    cfg.shapley.mode = enum_from(s, "mode", cfg.shapley.mode,
                                 {{"exact", ShapleyMode::kExact}, {"mc", ShapleyMode::kMonteCarlo}});
    cfg.shapley.mc_perms = narrow_int(s, "mc_perms", s.get_int("mc_perms", cfg.shapley.mc_perms));
    cfg.shapley.utility =
        enum_from(s, "utility", cfg.shapley.utility,
                  {{"accuracy", UtilityKind::kAccuracy}, {"neg_loss", UtilityKind::kNegLoss}});
    cfg.shapley.normalization = enum_from(
        s, "normalization", cfg.shapley.normalization,
        {{"clamp", NormalizationMode::kClamp}, {"shift_min", NormalizationMode::kShiftMin}});
    cfg.shapley.per_round_normalize =
        s.get_bool("per_round_normalize", cfg.shapley.per_round_normalize);
    cfg.shapley.exact_cap = narrow_int(s, "exact_cap", s.get_int("exact_cap", cfg.shapley.exact_cap));
    validated(r.key_path("shapley"), [&] { cfg.shapley.validate(); });
  }
  if (r.has("partition")) {
    const ObjectReader p = r.object("partition");
    p.allow_only({"num_clients", "alpha", "seed", "min_shard"});
    cfg.partition.num_clients =
        narrow_int(p, "num_clients", p.get_int("num_clients", cfg.partition.num_clients));
    cfg.partition.alpha = p.get_double("alpha", cfg.partition.alpha);
    cfg.partition.seed = p.get_u64("seed", cfg.partition.seed);
    cfg.partition.min_shard =
        narrow_int(p, "min_shard", p.get_int("min_shard", cfg.partition.min_shard));
    if (cfg.partition.num_clients < 1) p.fail_at("num_clients", "must be >= 1");
    if (!(cfg.partition.alpha > 0.0)) p.fail_at("alpha", "must be positive");
    if (cfg.partition.min_shard < 1) p.fail_at("min_shard", "must be >= 1");
  }
  cfg.val_frac = r.get_double("val_frac", cfg.val_frac);
  if (!(cfg.val_frac > 0.0 && cfg.val_frac < 1.0)) r.fail_at("val_frac", "must lie in (0, 1)");
  cfg.master_seed = r.get_u64("master_seed", cfg.master_seed);
  cfg.strategy_seed = r.get_optional_u64("strategy_seed");
  validated(path, [&] { cfg.validate(); });
  return cfg;
}

FederationConfig load_config(const std::filesystem::path& path) {
  return config_from_json(parse_json_file(path));
}

Json scenario_to_json(const ScenarioConfig& scenario) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  Json datasets = Json::array();
  for (const DatasetSpec& d : scenario.datasets) datasets.push_back(dataset_to_json(d));
  j["datasets"] = datasets;
  j["alphas"] = scenario.alphas;
  j["epochs"] = scenario.epochs;
  j["seeds"] = scenario.seeds;
  j["base"] = config_to_json(scenario.base);
  j["msm_pool"] = pool_to_json(scenario.msm_pool);
  j["fedrandom_runs"] = scenario.fedrandom_runs;
  j["master_seed"] = scenario.master_seed;
  return j;
}

ScenarioConfig scenario_from_json(const Json& doc) {
  const ObjectReader r(doc, "");
  r.allow_only({"schema_version", "datasets", "alphas", "epochs", "seeds", "base", "msm_pool",
                "fedrandom_runs", "master_seed"});
  if (r.has("schema_version") && r.get_int("schema_version", 0) != kSchemaVersion) {
    r.fail_at("schema_version", "unsupported version");
  }
  ScenarioConfig s;
  if (r.has("base")) s.base = config_from_json(r.raw("base"), "base");
  if (r.has("datasets")) {
    s.datasets.clear();
    for (const ObjectReader& d : r.object_array("datasets")) s.datasets.push_back(dataset_from_json(d));
  }
  if (r.has("alphas")) s.alphas = r.double_array("alphas");
  if (r.has("epochs")) {
    s.epochs.clear();
    for (std::int64_t e : r.int_array("epochs")) s.epochs.push_back(narrow_int(r, "epochs", e));
  }
  if (r.has("seeds")) s.seeds = r.u64_array("seeds");
  if (r.has("msm_pool")) s.msm_pool = pool_from_json(r, "msm_pool");
  s.fedrandom_runs = narrow_int(r, "fedrandom_runs", r.get_int("fedrandom_runs", s.fedrandom_runs));
  s.master_seed = r.get_u64("master_seed", s.master_seed);
  validated("", [&] { s.validate(); });
  return s;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(parse_json_file(path));
}

}  // namespace fedsim::cli
