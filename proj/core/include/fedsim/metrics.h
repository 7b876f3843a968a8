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

#ifndef FEDSIM_METRICS_H_
#define FEDSIM_METRICS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedsim/contribution.h"
#include "fedsim/data.h"

namespace fedsim {

struct MetricsReport {
  std::optional<double> avg_std;  // absent with fewer than two samples
  double l2 = 0.0;
  double linf = 0.0;
  std::size_t sample_count = 0;
  ContributionVector mean;
};

// avg_std: mean over clients of the Bessel-corrected standard deviation of
// that client's share across samples. l2 / linf: distance of the sample mean
// to the size-based ground truth.
MetricsReport sample_metrics(std::span<const ContributionVector> samples,
                             const GroundTruth& truth);

// One-sided exact binomial sign test, P[X >= wins] with X ~ Bin(wins + losses,
// 1/2). Absent when there are no decided pairs.
std::optional<double> sign_test_p_value(int wins, int losses);

enum class Criterion { kAvgStd, kL2, kLinf };
inline constexpr std::array<Criterion, 3> kCriteria = {Criterion::kAvgStd, Criterion::kL2,
                                                       Criterion::kLinf};
std::string_view criterion_name(Criterion c);

// Value of `c` in `report`; absent only for avg_std with < 2 samples.
std::optional<double> criterion_value(const MetricsReport& report, Criterion c);

struct CriterionSummary {
  Criterion criterion = Criterion::kAvgStd;
  int wins = 0;    // FedRandom strictly lower
  int losses = 0;  // MSM strictly lower
  int ties = 0;    // equal, or not comparable because a value is absent
  std::optional<double> p_value;
};

struct CellReports {
  std::string cell_id;
  MetricsReport report;
};

struct CellComparison {
  std::string cell_id;
  MetricsReport msm;
  MetricsReport fr;
};

struct ComparisonSummary {
  std::array<CriterionSummary, 3> criteria;
  std::vector<CellComparison> rows;

  std::size_t cell_count() const noexcept { return rows.size(); }
  const CriterionSummary& at(Criterion c) const {
    return criteria[static_cast<std::size_t>(c)];
  }
};

// Pairs MSM and FedRandom reports by cell id (both lists in the same cell
// order) and tallies wins per criterion.
ComparisonSummary compare(std::span<const CellReports> msm, std::span<const CellReports> fr);

}  // namespace fedsim

#endif  // FEDSIM_METRICS_H_
