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

#include "fedsim/metrics.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fedsim/error.h"
#include "fedsim/param_math.h"

namespace fedsim {

MetricsReport sample_metrics(std::span<const ContributionVector> samples,
                             const GroundTruth& truth) {
  require(!samples.empty(), ErrorCode::kInvalidArgument, "sample_metrics: no samples");
  const std::size_t n = truth.shares.size();
  for (const ContributionVector& s : samples) {
    require(s.size() == n, ErrorCode::kDimensionMismatch,
            "sample_metrics: sample client count differs from ground truth");
  }
  MetricsReport report;
  report.sample_count = samples.size();
  report.mean = mean_contribution(samples);
  if (samples.size() >= 2) {
    double std_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ss = 0.0;
      for (const ContributionVector& s : samples) {
        const double d = s[i] - report.mean[i];
        ss += d * d;
      }
      std_sum += std::sqrt(ss / static_cast<double>(samples.size() - 1));
    }
    report.avg_std = std_sum / static_cast<double>(n);
  }
  report.l2 = l2_dist(report.mean.values(), truth.shares.values());
  report.linf = linf_dist(report.mean.values(), truth.shares.values());
  return report;
}

std::optional<double> sign_test_p_value(int wins, int losses) {
  require(wins >= 0 && losses >= 0, ErrorCode::kInvalidArgument,
          "sign test: counts must be non-negative");
  const int trials = wins + losses;
  if (trials == 0) return std::nullopt;
  if (trials <= 1000) {
    // Pascal rows scaled by 1/2 per step stay representable up to ~1000 trials.
    std::vector<double> row(static_cast<std::size_t>(trials) + 1, 0.0);
    row[0] = 1.0;
    for (int n = 1; n <= trials; ++n) {
      for (int k = n; k >= 1; --k) row[k] = 0.5 * (row[k] + row[k - 1]);
      row[0] *= 0.5;
    }
    double p = 0.0;
    for (int k = trials; k >= wins; --k) p += row[k];
    return std::min(1.0, p);
  }
  // Sum the upper tail in log space so large trial counts do not underflow.
  const double log_half_n = trials * std::log(0.5);
  const double log_fact_n = std::lgamma(trials + 1.0);
  double p = 0.0;
  for (int k = wins; k <= trials; ++k) {
    const double log_binom = log_fact_n - std::lgamma(k + 1.0) - std::lgamma(trials - k + 1.0);
    p += std::exp(log_binom + log_half_n);
  }
  return std::min(1.0, p);
}

std::string_view criterion_name(Criterion c) {
  switch (c) {
    case Criterion::kAvgStd: return "avg_std";
    case Criterion::kL2: return "l2";
    case Criterion::kLinf: return "linf";
  }
  return "unknown";
}

std::optional<double> criterion_value(const MetricsReport& report, Criterion c) {
  switch (c) {
    case Criterion::kAvgStd: return report.avg_std;
    case Criterion::kL2: return report.l2;
    case Criterion::kLinf: return report.linf;
  }
  return std::nullopt;
}

ComparisonSummary compare(std::span<const CellReports> msm, std::span<const CellReports> fr) {
  require(msm.size() == fr.size(), ErrorCode::kInvalidArgument,
          "compare: MSM and FedRandom report lists differ in length");
  ComparisonSummary summary;
  for (std::size_t c = 0; c < kCriteria.size(); ++c) summary.criteria[c].criterion = kCriteria[c];
  for (std::size_t j = 0; j < msm.size(); ++j) {
    require(msm[j].cell_id == fr[j].cell_id, ErrorCode::kInvalidArgument,
            "compare: unpaired cells '" + msm[j].cell_id + "' and '" + fr[j].cell_id + "'");
    for (std::size_t c = 0; c < kCriteria.size(); ++c) {
      const auto a = criterion_value(fr[j].report, kCriteria[c]);
      const auto b = criterion_value(msm[j].report, kCriteria[c]);
      CriterionSummary& s = summary.criteria[c];
      if (!a || !b || *a == *b) {
        ++s.ties;
      } else if (*a < *b) {
        ++s.wins;
      } else {
        ++s.losses;
      }
    }
    summary.rows.push_back(CellComparison{msm[j].cell_id, msm[j].report, fr[j].report});
  }
  for (CriterionSummary& s : summary.criteria) s.p_value = sign_test_p_value(s.wins, s.losses);
  return summary;
}

}  // namespace fedsim
