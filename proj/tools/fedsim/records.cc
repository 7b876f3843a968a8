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

#include "fedsim/records.h"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "fedsim/config_io.h"
#include "fedsim/error.h"
#include "fedsim/format.h"

namespace fedsim::cli {
namespace {

Json values_json(std::span<const double> values) {
  Json out = Json::array();
  for (double v : values) out.push_back(v);
  return out;
}

std::uint64_t parse_hex(const ObjectReader& r, std::string_view key) {
  const std::string s = r.get_string(key, "");
  if (s.size() != 16) r.fail_at(key, "expected 16 hex digits");
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else r.fail_at(key, "expected 16 hex digits");
  }
  return v;
}

ContributionVector contribution_from(const ObjectReader& r, std::string_view key) {
  try {
    return ContributionVector::from_shares(r.double_array(key));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    r.fail_at(key, e.what());
  }
}

StrategyKind strategy_at(const ObjectReader& r, std::string_view key) {
  return strategy_from_string(r, key, r.get_string(key, ""));
}

std::string csv_number(double v) { return format_double(v); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  require(used == s.size(), ErrorCode::kFormat, "report CSV: bad number '" + s + "'");
  return v;
}

}  // namespace

Json run_record_to_json(const RunRecord& record, const FederationConfig& cfg) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "run_record";
  j["config"] = config_to_json(cfg);
  j["config_digest"] = hex64(record.config_digest);
  j["partition_digest"] = hex64(record.partition_digest);
  j["client_seed_digest"] = hex64(record.client_seed_digest);
  j["strategy"] = std::string(strategy_name(record.strategy));
  j["strategy_seed"] = record.strategy_seed;
  j["client_sizes"] = record.client_sizes;
  j["ground_truth"] = values_json(record.ground_truth.values());
  j["initial_accuracy"] = record.initial_accuracy;
  Json rounds = Json::array();
  for (const RoundRecord& r : record.rounds) {
    Json e;
    e["round"] = r.round;
    e["strategy"] = std::string(strategy_name(r.strategy));
    e["accuracy"] = r.accuracy;
    e["loss"] = r.loss;
    e["phi"] = values_json(r.shapley.phi);
    e["v_full"] = r.shapley.full_value;
    e["v_empty"] = r.shapley.empty_value;
    rounds.push_back(e);
  }
  j["rounds"] = rounds;
  j["contributions"] = values_json(record.contributions.values());
  return j;
}

StoredRun run_record_from_json(const Json& doc, const std::string& path) {
  const ObjectReader r(doc, path);
  r.allow_only({"schema_version", "kind", "config", "config_digest", "partition_digest",
                "client_seed_digest", "strategy", "strategy_seed", "client_sizes",
                "ground_truth", "initial_accuracy", "rounds", "contributions"});
  if (r.get_int("schema_version", 0) != kSchemaVersion) r.fail_at("schema_version", "unsupported version");
  if (r.get_string("kind", "") != "run_record") r.fail_at("kind", "expected run_record");
  StoredRun out;
  out.config = config_from_json(r.raw("config"), r.key_path("config"));
  RunRecord& rec = out.record;
  rec.config_digest = parse_hex(r, "config_digest");
  rec.partition_digest = parse_hex(r, "partition_digest");
  rec.client_seed_digest = parse_hex(r, "client_seed_digest");
  rec.strategy = strategy_at(r, "strategy");
  rec.strategy_seed = r.get_u64("strategy_seed", 0);
  for (std::uint64_t s : r.u64_array("client_sizes")) rec.client_sizes.push_back(s);
  rec.ground_truth = contribution_from(r, "ground_truth");
  rec.initial_accuracy = r.get_double("initial_accuracy", 0.0);
  for (const ObjectReader& e : r.object_array("rounds")) {
    e.allow_only({"round", "strategy", "accuracy", "loss", "phi", "v_full", "v_empty"});
    RoundRecord round;
    round.round = static_cast<int>(e.get_int("round", 0));
    round.strategy = strategy_at(e, "strategy");
    round.accuracy = e.get_double("accuracy", 0.0);
    round.loss = e.get_double("loss", 0.0);
    round.shapley.phi = e.double_array("phi");
    round.shapley.round_index = round.round;
    round.shapley.full_value = e.get_double("v_full", 0.0);
    round.shapley.empty_value = e.get_double("v_empty", 0.0);
    rec.rounds.push_back(std::move(round));
  }
  rec.contributions = contribution_from(r, "contributions");
  if (rec.rounds.size() != static_cast<std::size_t>(out.config.rounds)) {
    r.fail_at("rounds", "expected " + std::to_string(out.config.rounds) + " round entries");
  }
  return out;
}

Json cell_record_to_json(const CellResult& cell) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "cell_record";
  j["cell"] = {{"index", cell.cell.index},     {"id", cell.cell.id},
               {"dataset", cell.cell.dataset}, {"alpha", cell.cell.alpha},
               {"epochs", cell.cell.epochs},   {"seed", cell.cell.seed}};
  j["ground_truth"] = values_json(cell.truth.shares.values());
  const auto method = [&](const SampleSet& set, const std::vector<FederationConfig>& cfgs) {
    Json runs = Json::array();
    for (std::size_t i = 0; i < set.runs.size(); ++i) {
      runs.push_back(run_record_to_json(set.runs[i], cfgs[i]));
    }
    return runs;
  };
  std::vector<FederationConfig> msm_cfgs, fr_cfgs;
  for (const RunRecord& r : cell.msm.runs) msm_cfgs.push_back(msm_member_config(cell.cell.config, r.strategy));
  for (std::size_t k = 0; k < cell.fr.runs.size(); ++k) {
    fr_cfgs.push_back(fedrandom_member_config(cell.cell.config, static_cast<int>(k)));
  }
  j["msm_runs"] = method(cell.msm, msm_cfgs);
  j["fr_runs"] = method(cell.fr, fr_cfgs);
  return j;
}

StoredCell cell_record_from_json(const Json& doc) {
  const ObjectReader r(doc, "");
  r.allow_only({"schema_version", "kind", "cell", "ground_truth", "msm_runs", "fr_runs"});
  if (r.get_int("schema_version", 0) != kSchemaVersion) r.fail_at("schema_version", "unsupported version");
  if (r.get_string("kind", "") != "cell_record") r.fail_at("kind", "expected cell_record");
  StoredCell out;
  const ObjectReader c = r.object("cell");
  c.allow_only({"index", "id", "dataset", "alpha", "epochs", "seed"});
  out.index = static_cast<std::size_t>(c.get_u64("index", 0));
  out.id = c.get_string("id", "");
  out.dataset = c.get_string("dataset", "");
  out.alpha = c.get_double("alpha", 0.0);
  out.epochs = static_cast<int>(c.get_int("epochs", 0));
  out.seed = c.get_u64("seed", 0);
  out.ground_truth = contribution_from(r, "ground_truth");
  const auto runs = [&](std::string_view key) {
    const Json& arr = r.raw(key);
    if (!arr.is_array() || arr.empty()) r.fail_at(key, "expected non-empty array of run records");
    std::vector<StoredRun> stored;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      stored.push_back(run_record_from_json(arr[i], r.key_path(key) + "[" + std::to_string(i) + "]"));
    }
    return stored;
  };
  out.msm = runs("msm_runs");
  out.fr = runs("fr_runs");
  return out;
}

std::vector<ReportRow> report_rows(const StoredCell& cell) {
  const GroundTruth truth{cell.ground_truth};
  std::vector<ReportRow> rows;
  for (const auto& [method, runs] :
       {std::pair{"MSM", &cell.msm}, std::pair{"FR", &cell.fr}}) {
    std::vector<ContributionVector> samples;
    for (const StoredRun& run : *runs) samples.push_back(run.record.contributions);
    const MetricsReport m = sample_metrics(samples, truth);
    rows.push_back(ReportRow{cell.id, cell.dataset, cell.alpha, cell.epochs, cell.seed, method,
                             m.sample_count, m.avg_std, m.l2, m.linf});
  }
  return rows;
}

std::vector<ReportRow> report_rows(const ScenarioResult& result) {
  std::vector<ReportRow> rows;
  for (const CellResult& c : result.cells) {
    for (const auto& [method, m] :
         {std::pair{"MSM", &c.msm_metrics}, std::pair{"FR", &c.fr_metrics}}) {
      rows.push_back(ReportRow{c.cell.id, c.cell.dataset, c.cell.alpha, c.cell.epochs, c.cell.seed,
                               method, m->sample_count, m->avg_std, m->l2, m->linf});
    }
  }
  return rows;
}

std::string render_report_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const ReportRow& r : rows) {
    out += r.scenario_id + "," + r.dataset + "," + csv_number(r.alpha) + "," +
           std::to_string(r.epochs) + "," + std::to_string(r.seed) + "," + r.method + "," +
           std::to_string(r.sample_count) + "," + (r.avg_std ? csv_number(*r.avg_std) : "") + "," +
           csv_number(r.l2) + "," + csv_number(r.linf) + "\n";
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kReportCsvHeader,
          ErrorCode::kFormat, "report CSV: missing or unexpected header");
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    const std::vector<std::string> f = split_csv_line(line);
    require(f.size() == 10, ErrorCode::kFormat, "report CSV: expected 10 fields: " + line);
    ReportRow r;
    r.scenario_id = f[0];
    r.dataset = f[1];
    r.alpha = parse_double(f[2]);
    r.epochs = std::stoi(f[3]);
    r.seed = std::stoull(f[4]);
    r.method = f[5];
    r.sample_count = std::stoull(f[6]);
    if (!f[7].empty()) r.avg_std = parse_double(f[7]);
    r.l2 = parse_double(f[8]);
    r.linf = parse_double(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

Json summary_to_json(const ComparisonSummary& summary) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "comparison_summary";
  j["cell_count"] = summary.cell_count();
  Json criteria = Json::array();
  for (const CriterionSummary& c : summary.criteria) {
    Json e;
    e["criterion"] = std::string(criterion_name(c.criterion));
    e["fr_wins"] = c.wins;
    e["msm_wins"] = c.losses;
    e["ties"] = c.ties;
    e["fr_win_rate"] = summary.cell_count() == 0
                           ? Json(nullptr)
                           : Json(static_cast<double>(c.wins) /
                                  static_cast<double>(summary.cell_count()));
    e["sign_test_p"] = c.p_value ? Json(*c.p_value) : Json(nullptr);
    criteria.push_back(e);
  }
  j["criteria"] = criteria;
  Json rows = Json::array();
  for (const CellComparison& row : summary.rows) {
    const auto metrics = [](const MetricsReport& m) {
      return Json{{"sample_count", m.sample_count},
                  {"avg_std", m.avg_std ? Json(*m.avg_std) : Json(nullptr)},
                  {"l2", m.l2},
                  {"linf", m.linf}};
    };
    rows.push_back(Json{{"cell_id", row.cell_id}, {"msm", metrics(row.msm)}, {"fr", metrics(row.fr)}});
  }
  j["rows"] = rows;
  return j;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1)) + "-" +
         std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    require(static_cast<bool>(out), ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorCode::kIo, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace fedsim::cli
