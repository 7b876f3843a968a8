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

#ifndef FEDSIM_CONTRIBUTION_H_
#define FEDSIM_CONTRIBUTION_H_

#include <cstddef>
#include <span>
#include <vector>

namespace fedsim {

// Normalized per-client shares: every entry non-negative, total within
// kSumTolerance of 1.
class ContributionVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  ContributionVector() = default;

  // Throws kInvalidArgument when the shares do not form a valid vector.
  static ContributionVector from_shares(std::vector<double> shares);
  static ContributionVector uniform(std::size_t n);

  std::size_t size() const noexcept { return shares_.size(); }
  double operator[](std::size_t i) const { return shares_[i]; }
  std::span<const double> values() const noexcept { return shares_; }

  friend bool operator==(const ContributionVector&, const ContributionVector&) = default;

 private:
  explicit ContributionVector(std::vector<double> shares) : shares_(std::move(shares)) {}

  std::vector<double> shares_;
};

// True iff `shares` satisfies the ContributionVector invariants.
bool is_valid_contribution(std::span<const double> shares);

// Per-client arithmetic mean of equally sized vectors.
ContributionVector mean_contribution(std::span<const ContributionVector> samples);

}  // namespace fedsim

#endif  // FEDSIM_CONTRIBUTION_H_
