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

#include <vector>

#include <gtest/gtest.h>

#include "fedsim/error.h"

namespace fedsim {
namespace {

TEST(ContributionVectorTest, AcceptsValidShares) {
  const ContributionVector c = ContributionVector::from_shares({0.25, 0.75});
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c[1], 0.75);
}

TEST(ContributionVectorTest, RejectsInvalidShares) {
  EXPECT_THROW(ContributionVector::from_shares({}), Error);
  EXPECT_THROW(ContributionVector::from_shares({0.5, 0.6}), Error);
  EXPECT_THROW(ContributionVector::from_shares({1.2, -0.2}), Error);
  EXPECT_FALSE(is_valid_contribution(std::vector<double>{0.5, 0.4}));
  EXPECT_TRUE(is_valid_contribution(std::vector<double>{1.0}));
}

TEST(ContributionVectorTest, Uniform) {
  const ContributionVector u = ContributionVector::uniform(4);
  for (double x : u.values()) EXPECT_EQ(x, 0.25);
}

TEST(MeanContributionTest, MeanOfOppositeCornersIsCentre) {
  const std::vector<ContributionVector> s{ContributionVector::from_shares({1.0, 0.0}),
                                          ContributionVector::from_shares({0.0, 1.0})};
  const ContributionVector m = mean_contribution(s);
  EXPECT_EQ(m[0], 0.5);
  EXPECT_EQ(m[1], 0.5);
}

TEST(MeanContributionTest, IdenticalSamplesGiveSameVector) {
  const ContributionVector a = ContributionVector::from_shares({0.1, 0.2, 0.7});
  const std::vector<ContributionVector> s(8, a);
  const ContributionVector m = mean_contribution(s);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(m[i], a[i], 1e-15);
}

TEST(MeanContributionTest, SizeMismatchThrows) {
  const std::vector<ContributionVector> s{ContributionVector::uniform(2),
                                          ContributionVector::uniform(3)};
  EXPECT_THROW(mean_contribution(s), Error);
  EXPECT_THROW(mean_contribution(std::vector<ContributionVector>{}), Error);
}

}  // namespace
}  // namespace fedsim
