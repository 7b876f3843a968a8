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

#ifndef FEDSIM_TOOLS_RECORDS_H_
#define FEDSIM_TOOLS_RECORDS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/experiment.h"
#include "fedsim/json_io.h"
#include "fedsim/metrics.h"

namespace fedsim::cli {

// One federation as stored on disk (kind "run_record").
struct StoredRun {
  FederationConfig config;
  RunRecord record;
};

Json run_record_to_json(const RunRecord& record, const FederationConfig& cfg);
// `path` prefixes key paths in error messages (e.g. "msm_runs[2]").
StoredRun run_record_from_json(const Json& doc, const std::string& path = "");

// One scenario cell with all of its MSM and FedRandom runs (kind "cell_record").
struct StoredCell {
  std::size_t index = 0;
  std::string id;
  std::string dataset;
  double alpha = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;
  ContributionVector ground_truth;
  std::vector<StoredRun> msm;
  std::vector<StoredRun> fr;
};

Json cell_record_to_json(const CellResult& cell);
StoredCell cell_record_from_json(const Json& doc);

struct ReportRow {
  std::string scenario_id;
  std::string dataset;
  double alpha = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;
  std::string method;  // "MSM" or "FR"
  std::size_t sample_count = 0;
  std::optional<double> avg_std;
  double l2 = 0.0;
  double linf = 0.0;
};

inline constexpr const char* kReportCsvHeader =
    "scenario_id,dataset,alpha,epochs,seed,method,sample_count,avg_std,l2,linf";

// MSM row then FR row for one cell, metrics recomputed from the samples.
std::vector<ReportRow> report_rows(const StoredCell& cell);
std::vector<ReportRow> report_rows(const ScenarioResult& result);

// Header plus one LF-terminated line per row; absent avg_std is an empty field.
std::string render_report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(const std::string& text);

Json summary_to_json(const ComparisonSummary& summary);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace fedsim::cli

#endif  // FEDSIM_TOOLS_RECORDS_H_
