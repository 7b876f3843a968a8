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

#include "fedsim/param_math.h"

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "fedsim/error.h"
#include "fedsim/random.h"
#include "oracles.h"

namespace fedsim {
namespace {

std::vector<ParamVec> random_vecs(Rng& rng, std::size_t m, std::size_t dim) {
  std::vector<ParamVec> out;
  for (std::size_t j = 0; j < m; ++j) {
    ParamVec v(dim);
    for (std::size_t k = 0; k < dim; ++k) v[k] = rng.uniform(-10.0, 10.0);
    out.push_back(v);
  }
  return out;
}

TEST(ParamVecTest, RejectsNonFiniteValues) {
  EXPECT_THROW(ParamVec({1.0, std::nan("")}), Error);
  EXPECT_THROW(ParamVec(std::vector<double>{std::numeric_limits<double>::infinity()}), Error);
  EXPECT_TRUE(ParamVec({1.0, 2.0}).all_finite());
}

TEST(WeightedSumTest, SymmetricMean) {
  const std::vector<ParamVec> v{{0, 2}, {2, 0}};
  const std::vector<double> w{0.5, 0.5};
  EXPECT_EQ(weighted_sum(v, w), ParamVec({1, 1}));
}

TEST(WeightedSumTest, UnequalWeights) {
  const std::vector<ParamVec> v{{0}, {4}};
  const std::vector<double> w{0.25, 0.75};
  EXPECT_EQ(weighted_sum(v, w), ParamVec({3}));
}

TEST(WeightedSumTest, Identity) {
  const std::vector<ParamVec> v{{1, 1}};
  const std::vector<double> w{1.0};
  EXPECT_EQ(weighted_sum(v, w), ParamVec({1, 1}));
}

TEST(WeightedSumTest, Errors) {
  const std::vector<ParamVec> none;
  const std::vector<double> nw;
  EXPECT_THROW(weighted_sum(none, nw), Error);
  const std::vector<ParamVec> mixed{{1, 2}, {1}};
  const std::vector<double> w2{0.5, 0.5};
  try {
    weighted_sum(mixed, w2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  const std::vector<ParamVec> ok{{1}, {2}};
  const std::vector<double> bad{0.5, std::nan("")};
  EXPECT_THROW(weighted_sum(ok, bad), Error);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_THROW(weighted_sum(ok, zero), Error);
  const std::vector<double> short_w{1.0};
  EXPECT_THROW(weighted_sum(ok, short_w), Error);
}

// Joint permutation of (vecs, weights, keys) must not change a single bit.
TEST(WeightedSumTest, CanonicalOrderIsPermutationInvariant) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng.below(7);
    std::vector<ParamVec> vecs = random_vecs(rng, m, 13);
    std::vector<double> w(m);
    std::vector<int> keys(m);
    for (std::size_t j = 0; j < m; ++j) {
      w[j] = rng.uniform(0.01, 1.0);
      keys[j] = static_cast<int>(j);
    }
    const ParamVec reference = weighted_sum(vecs, w, keys);

    std::vector<std::size_t> perm(m);
    for (std::size_t j = 0; j < m; ++j) perm[j] = j;
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<ParamVec> pv;
    std::vector<double> pw;
    std::vector<int> pk;
    for (std::size_t j : perm) {
      pv.push_back(vecs[j]);
      pw.push_back(w[j]);
      pk.push_back(keys[j]);
    }
    EXPECT_EQ(weighted_sum(pv, pw, pk), reference);
  }
}

TEST(CoordMedianTest, Examples) {
  EXPECT_EQ(coord_median(std::vector<ParamVec>{{1}, {5}, {100}}), ParamVec({5}));
  EXPECT_EQ(coord_median(std::vector<ParamVec>{{1}, {3}}), ParamVec({2}));
  EXPECT_EQ(coord_median(std::vector<ParamVec>{{2, 9}, {2, 9}}), ParamVec({2, 9}));
  EXPECT_THROW(coord_median(std::vector<ParamVec>{}), Error);
}

TEST(CoordTrimmedMeanTest, Examples) {
  EXPECT_EQ(coord_trimmed_mean(std::vector<ParamVec>{{0}, {5}, {1000}}, 0.34), ParamVec({5}));
  EXPECT_EQ(coord_trimmed_mean(std::vector<ParamVec>{{1}, {2}, {3}, {4}}, 0.0), ParamVec({2.5}));
  const std::vector<double> col{0, 1, 2, 3, 100};
  const double expected = oracle::sorted_trimmed_mean(col, 1);
  EXPECT_DOUBLE_EQ(expected, 2.0);
  EXPECT_DOUBLE_EQ(
      coord_trimmed_mean(std::vector<ParamVec>{{0}, {1}, {2}, {3}, {100}}, 0.2)[0], expected);
}

TEST(CoordTrimmedMeanTest, RejectsBadFractions) {
  const std::vector<ParamVec> v{{0}, {1}};
  EXPECT_THROW(coord_trimmed_mean(v, 0.5), Error);
  EXPECT_THROW(coord_trimmed_mean(v, -0.1), Error);
}

TEST(CoordTrimmedMeanTest, ZeroTrimMatchesUniformWeightedSum) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.below(8);
    const std::vector<ParamVec> vecs = random_vecs(rng, m, 6);
    const std::vector<double> w(m, 1.0 / static_cast<double>(m));
    const ParamVec a = coord_trimmed_mean(vecs, 0.0);
    const ParamVec b = weighted_sum(vecs, w);
    for (std::size_t k = 0; k < a.dim(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(RobustAggregatesTest, StayInsideCoordinateHull) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.below(9);
    const std::vector<ParamVec> vecs = random_vecs(rng, m, 5);
    const ParamVec med = coord_median(vecs);
    const ParamVec trim = coord_trimmed_mean(vecs, 0.2);
    for (std::size_t k = 0; k < 5; ++k) {
      double lo = vecs[0][k], hi = vecs[0][k];
      for (const ParamVec& v : vecs) {
        lo = std::min(lo, v[k]);
        hi = std::max(hi, v[k]);
      }
      EXPECT_GE(med[k], lo);
      EXPECT_LE(med[k], hi);
      EXPECT_GE(trim[k], lo);
      EXPECT_LE(trim[k], hi);
    }
  }
}

TEST(DistanceTest, Examples) {
  EXPECT_NEAR(l2_dist(ParamVec{0.4, 0.6}, ParamVec{0.5, 0.5}), std::sqrt(0.02), 1e-15);
  EXPECT_NEAR(linf_dist(ParamVec{0.4, 0.6}, ParamVec{0.5, 0.5}), 0.1, 1e-15);
  const ParamVec a{1.5, -2.0, 7.0};
  EXPECT_EQ(l2_dist(a, a), 0.0);
  EXPECT_EQ(linf_dist(a, a), 0.0);
  EXPECT_EQ(l2_dist(ParamVec{3, 0}, ParamVec{0, 4}), 5.0);
  EXPECT_EQ(linf_dist(ParamVec{0, 10}, ParamVec{1, 0}), 10.0);
  EXPECT_THROW(l2_dist(ParamVec{1}, ParamVec{1, 2}), Error);
}

TEST(DistanceTest, SymmetryAndTriangleInequality) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<ParamVec> t = random_vecs(rng, 3, 4);
    EXPECT_EQ(l2_dist(t[0], t[1]), l2_dist(t[1], t[0]));
    EXPECT_EQ(linf_dist(t[0], t[1]), linf_dist(t[1], t[0]));
    EXPECT_LE(l2_dist(t[0], t[2]), l2_dist(t[0], t[1]) + l2_dist(t[1], t[2]) + 1e-12);
    EXPECT_LE(linf_dist(t[0], t[2]), linf_dist(t[0], t[1]) + linf_dist(t[1], t[2]) + 1e-12);
  }
}

}  // namespace
}  // namespace fedsim
