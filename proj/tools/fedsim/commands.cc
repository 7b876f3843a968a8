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

#include "fedsim/commands.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fedsim/config_io.h"
#include "fedsim/error.h"
#include "fedsim/format.h"
#include "fedsim/records.h"

namespace fedsim::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char* kDeskPreset = "desk";

struct PartitionArgs {
  std::string dataset = kDeskPreset;
  int clients = 5;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::size_t min_shard = 1;
  std::string out;
};

struct RunArgs {
  std::string config;
  std::string out;
};

struct ExperimentArgs {
  std::string scenario;
  std::string out;
  int workers = 1;
};

struct ReportArgs {
  std::string in;
  std::string format = "csv";
  std::string out;
};

DatasetSpec load_dataset_arg(const std::string& arg) {
  if (arg == kDeskPreset) return default_desk_scenario().datasets.front();
  const Json doc = parse_json_file(arg);
  return dataset_from_json(ObjectReader(doc, ""));
}

ScenarioConfig load_scenario_arg(const std::string& arg) {
  if (arg == kDeskPreset) return default_desk_scenario();
  return load_scenario(arg);
}

int cmd_partition(const PartitionArgs& a, std::ostream& out) {
  const DatasetSpec spec = load_dataset_arg(a.dataset);
  const Dataset full = spec.materialize();
  PartitionSpec p;
  p.num_clients = a.clients;
  p.alpha = a.alpha;
  p.seed = a.seed;
  p.min_shard = a.min_shard;
  const std::vector<ClientDataset> parts = dirichlet_partition(full, p);
  const GroundTruth truth = ground_truth_sizes(parts);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "partition";
  j["dataset"] = dataset_to_json(spec);
  j["partition"] = {{"num_clients", p.num_clients},
                    {"alpha", p.alpha},
                    {"seed", p.seed},
                    {"min_shard", p.min_shard}};
  j["total_records"] = full.size();
  Json sizes = Json::array();
  Json clients = Json::array();
  for (const ClientDataset& c : parts) {
    sizes.push_back(c.data.size());
    clients.push_back(Json{{"client_id", c.client_id},
                           {"size", c.data.size()},
                           {"indices", c.source_indices}});
  }
  j["sizes"] = sizes;
  Json shares = Json::array();
  for (double s : truth.shares.values()) shares.push_back(s);
  j["ground_truth"] = shares;
  j["clients"] = clients;
  write_file_atomic(a.out, dump_json(j));

  out << "client_id,size,ground_truth\n";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out << parts[i].client_id << "," << parts[i].data.size() << ","
        << format_double(truth.shares[i]) << "\n";
  }
  return 0;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
  const FederationConfig cfg = load_config(a.config);
  const RunRecord record = run_federation(cfg);
  write_file_atomic(a.out, dump_json(run_record_to_json(record, cfg)));
  out << "strategy," << strategy_name(record.strategy) << "\n";
  out << "final_accuracy," << format_double(record.rounds.back().accuracy) << "\n";
  out << "contributions";
  for (double c : record.contributions.values()) out << "," << format_double(c);
  out << "\n";
  return 0;
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  const ScenarioConfig scenario = load_scenario_arg(a.scenario);
  require(a.workers >= 1, ErrorCode::kInvalidArgument, "--workers must be >= 1");
  const std::size_t cells = expand_grid(scenario).size();
  err << "experiment: " << cells << " cells, "
      << cells * (scenario.msm_pool.size() + static_cast<std::size_t>(scenario.fedrandom_runs))
      << " federations, " << a.workers << " workers\n";

  // Everything is computed before the first byte hits the disk.
  const ScenarioResult result = run_scenario(scenario, a.workers);
  const fs::path dir(a.out);
  fs::create_directories(dir / "cells");
  write_file_atomic(dir / "scenario.json", dump_json(scenario_to_json(scenario)));
  for (const CellResult& c : result.cells) {
    write_file_atomic(dir / "cells" / (c.cell.id + ".json"), dump_json(cell_record_to_json(c)));
  }
  const std::string csv = render_report_csv(report_rows(result));
  write_file_atomic(dir / "report.csv", csv);
  write_file_atomic(dir / "summary.json", dump_json(summary_to_json(result.summary)));

  out << "criterion,fr_wins,msm_wins,ties,cells,sign_test_p\n";
  for (const CriterionSummary& c : result.summary.criteria) {
    out << criterion_name(c.criterion) << "," << c.wins << "," << c.losses << "," << c.ties << ","
        << result.summary.cell_count() << "," << (c.p_value ? format_double(*c.p_value) : "")
        << "\n";
  }
  return 0;
}

struct Trace {
  std::string scenario_id;
  std::string method;
  std::size_t run = 0;
  std::string strategy;
  std::vector<double> accuracy;
};

struct LoadedRecords {
  std::vector<StoredCell> cells;
  std::vector<std::pair<std::string, StoredRun>> runs;  // keyed by file stem
  std::vector<std::string> problems;
};

LoadedRecords load_records(const fs::path& in) {
  require(fs::is_directory(in), ErrorCode::kIo, "not a directory: " + in.string());
  const fs::path cells_dir = in / "cells";
  std::vector<fs::path> files;
  for (const fs::path& d : {in, cells_dir}) {
    if (!fs::is_directory(d)) continue;
    for (const auto& entry : fs::directory_iterator(d)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json" &&
          entry.path().filename() != "summary.json" && entry.path().filename() != "scenario.json") {
        files.push_back(entry.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  LoadedRecords loaded;
  for (const fs::path& f : files) {
    try {
      const Json doc = parse_json_file(f);
      const std::string kind = doc.is_object() && doc.contains("kind") && doc["kind"].is_string()
                                   ? doc["kind"].get<std::string>()
                                   : "";
      if (kind == "cell_record") {
        loaded.cells.push_back(cell_record_from_json(doc));
      } else if (kind == "run_record") {
        loaded.runs.emplace_back(f.stem().string(), run_record_from_json(doc));
      } else {
        loaded.problems.push_back(f.string() + ": not a cell_record or run_record");
      }
    } catch (const std::exception& e) {
      const std::string what = e.what();
      loaded.problems.push_back(what.rfind(f.string(), 0) == 0 ? what : f.string() + ": " + what);
    }
  }
  std::sort(loaded.cells.begin(), loaded.cells.end(),
            [](const StoredCell& a, const StoredCell& b) {
              return a.index != b.index ? a.index < b.index : a.id < b.id;
            });
  return loaded;
}

std::vector<Trace> collect_traces(const LoadedRecords& rec) {
  std::vector<Trace> traces;
  const auto add = [&](const std::string& id, const std::string& method, std::size_t run,
                       const StoredRun& r) {
    traces.push_back(Trace{id, method, run, std::string(strategy_name(r.record.strategy)),
                           r.record.accuracy_trace()});
  };
  for (const StoredCell& c : rec.cells) {
    for (std::size_t i = 0; i < c.msm.size(); ++i) add(c.id, "MSM", i, c.msm[i]);
    for (std::size_t i = 0; i < c.fr.size(); ++i) add(c.id, "FR", i, c.fr[i]);
  }
  for (const auto& [stem, r] : rec.runs) add(stem, "RUN", 0, r);
  return traces;
}

ComparisonSummary summarize(const std::vector<StoredCell>& cells) {
  std::vector<CellReports> msm, fr;
  for (const StoredCell& c : cells) {
    const std::vector<ReportRow> rows = report_rows(c);
    const auto report = [](const ReportRow& r) {
      MetricsReport m;
      m.sample_count = r.sample_count;
      m.avg_std = r.avg_std;
      m.l2 = r.l2;
      m.linf = r.linf;
      return m;
    };
    msm.push_back(CellReports{c.id, report(rows[0])});
    fr.push_back(CellReports{c.id, report(rows[1])});
  }
  return compare(msm, fr);
}

std::string render_report(const LoadedRecords& rec, const std::string& format) {
  std::vector<ReportRow> rows;
  for (const StoredCell& c : rec.cells) {
    for (ReportRow& r : report_rows(c)) rows.push_back(std::move(r));
  }
  const std::vector<Trace> traces = collect_traces(rec);
  if (format == "csv") {
    std::string s = render_report_csv(rows);
    s += "\nscenario_id,method,run,strategy,round,accuracy\n";
    for (const Trace& t : traces) {
      for (std::size_t i = 0; i < t.accuracy.size(); ++i) {
        s += t.scenario_id + "," + t.method + "," + std::to_string(t.run) + "," + t.strategy +
             "," + std::to_string(i + 1) + "," + format_double(t.accuracy[i]) + "\n";
      }
    }
    return s;
  }
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "report";
  Json jrows = Json::array();
  for (const ReportRow& r : rows) {
    jrows.push_back(Json{{"scenario_id", r.scenario_id},
                         {"dataset", r.dataset},
                         {"alpha", r.alpha},
                         {"epochs", r.epochs},
                         {"seed", r.seed},
                         {"method", r.method},
                         {"sample_count", r.sample_count},
                         {"avg_std", r.avg_std ? Json(*r.avg_std) : Json(nullptr)},
                         {"l2", r.l2},
                         {"linf", r.linf}});
  }
  j["rows"] = jrows;
  Json jtraces = Json::array();
  for (const Trace& t : traces) {
    Json acc = Json::array();
    for (double v : t.accuracy) acc.push_back(v);
    jtraces.push_back(Json{{"scenario_id", t.scenario_id},
                           {"method", t.method},
                           {"run", t.run},
                           {"strategy", t.strategy},
                           {"accuracy", acc}});
  }
  j["traces"] = jtraces;
  if (!rec.cells.empty()) j["summary"] = summary_to_json(summarize(rec.cells));
  return dump_json(j);
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  const LoadedRecords rec = load_records(a.in);
  for (const std::string& p : rec.problems) err << "corrupt record " << p << "\n";
  if (rec.cells.empty() && rec.runs.empty()) {
    err << "error: no records found in " << a.in << "\n";
    return 1;
  }
  const std::string text = render_report(rec, a.format);
  if (a.out.empty()) {
    out << text;
  } else {
    write_file_atomic(a.out, text);
  }
  return rec.problems.empty() ? 0 : 1;
}

}  // namespace

int default_workers() {
  const char* env = std::getenv("FEDSIM_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  require(*end == '\0' && v >= 1 && v <= 1024, ErrorCode::kConfig,
          std::string("FEDSIM_WORKERS must be an integer in [1, 1024], got '") + env + "'");
  return static_cast<int>(v);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated learning simulator with Shapley contribution estimates", "fedsim"};
  app.require_subcommand(1);

  PartitionArgs pa;
  CLI::App* partition = app.add_subcommand("partition", "Split a dataset across clients");
  partition->add_option("--dataset", pa.dataset, "Dataset spec JSON, or 'desk'")->capture_default_str();
  partition->add_option("--clients", pa.clients, "Number of clients")->capture_default_str();
  partition->add_option("--alpha", pa.alpha, "Dirichlet concentration")->capture_default_str();
  partition->add_option("--seed", pa.seed, "Partition seed")->capture_default_str();
  partition->add_option("--min-shard", pa.min_shard, "Minimum records per client")->capture_default_str();
  partition->add_option("--out", pa.out, "Output partition file")->required();

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "Run one federation");
  run->add_option("config", ra.config, "Federation config JSON")->required();
  run->add_option("--out", ra.out, "Output run record")->required();

  ExperimentArgs ea;
  int env_workers = 1;
  std::optional<std::string> env_error;
  try {
    env_workers = default_workers();
  } catch (const Error& e) {
    env_error = e.what();
  }
  ea.workers = env_workers;
  CLI::App* experiment = app.add_subcommand("experiment", "Run an MSM vs FedRandom scenario grid");
  experiment->add_option("scenario", ea.scenario, "Scenario JSON, or 'desk'")->required();
  experiment->add_option("--out", ea.out, "Output directory")->required();
  CLI::Option* workers_opt =
      experiment->add_option("--workers", ea.workers, "Worker threads (default: FEDSIM_WORKERS or 1)");

  ReportArgs rpa;
  CLI::App* report = app.add_subcommand("report", "Aggregate stored records");
  report->add_option("--in", rpa.in, "Directory of records")->required();
  report->add_option("--format", rpa.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  report->add_option("--out", rpa.out, "Output file (default: stdout)");

  std::vector<std::string> argv_storage{"fedsim"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (partition->parsed()) return cmd_partition(pa, out);
    if (run->parsed()) return cmd_run(ra, out);
    if (experiment->parsed()) {
      if (env_error && workers_opt->count() == 0) fail(ErrorCode::kConfig, *env_error);
      return cmd_experiment(ea, out, err);
    }
    if (report->parsed()) return cmd_report(rpa, out, err);
  } catch (const Error& e) {
    err << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace fedsim::cli
