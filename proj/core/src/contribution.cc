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

#include "fedsim/contribution.h"

#include <cmath>
#include <string>

#include "fedsim/error.h"

namespace fedsim {

bool is_valid_contribution(std::span<const double> shares) {
  if (shares.empty()) return false;
  double total = 0.0;
  for (double c : shares) {
    if (!std::isfinite(c) || c < 0.0) return false;
    total += c;
  }
  return std::abs(total - 1.0) <= ContributionVector::kSumTolerance;
}

ContributionVector ContributionVector::from_shares(std::vector<double> shares) {
  require(is_valid_contribution(shares), ErrorCode::kInvalidArgument,
          "contribution shares must be non-negative and sum to 1");
  return ContributionVector(std::move(shares));
}

ContributionVector ContributionVector::uniform(std::size_t n) {
  require(n > 0, ErrorCode::kInvalidArgument, "contribution vector needs n >= 1");
  return ContributionVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ContributionVector mean_contribution(std::span<const ContributionVector> samples) {
  require(!samples.empty(), ErrorCode::kInvalidArgument,
          "mean_contribution: no samples");
  const std::size_t n = samples.front().size();
  std::vector<double> mean(n, 0.0);
  for (const ContributionVector& sample : samples) {
    require(sample.size() == n, ErrorCode::kDimensionMismatch,
            "mean_contribution: client count differs between samples");
    for (std::size_t i = 0; i < n; ++i) mean[i] += sample[i];
  }
  for (double& c : mean) c /= static_cast<double>(samples.size());
  return ContributionVector::from_shares(std::move(mean));
}

}  // namespace fedsim
