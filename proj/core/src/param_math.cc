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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsim/error.h"

namespace fedsim {
namespace {

void check_same_dims(std::span<const ParamVec> vecs, const char* op) {
  require(!vecs.empty(), ErrorCode::kInvalidArgument,
          std::string(op) + ": empty input");
  const std::size_t d = vecs.front().dim();
  for (const ParamVec& v : vecs) {
    require(v.dim() == d, ErrorCode::kDimensionMismatch,
            std::string(op) + ": dimension mismatch (" + std::to_string(v.dim()) +
                " vs " + std::to_string(d) + ")");
  }
}

// Fills `column` with coordinate k of every vector, sorted ascending.
void sorted_column(std::span<const ParamVec> vecs, std::size_t k,
                   std::vector<double>& column) {
  column.clear();
  for (const ParamVec& v : vecs) column.push_back(v[k]);
  std::sort(column.begin(), column.end());
}

}  // namespace

ParamVec::ParamVec(std::size_t dim, double fill) : values_(dim, fill) {
  require(std::isfinite(fill), ErrorCode::kNonFinite, "ParamVec: non-finite fill");
}

ParamVec::ParamVec(std::vector<double> values) : values_(std::move(values)) {
  require(all_finite(), ErrorCode::kNonFinite, "ParamVec: non-finite entry");
}

ParamVec::ParamVec(std::initializer_list<double> values)
    : ParamVec(std::vector<double>(values)) {}

bool ParamVec::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

ParamVec weighted_sum(std::span<const ParamVec> vecs,
                      std::span<const double> weights) {
  check_same_dims(vecs, "weighted_sum");
  require(weights.size() == vecs.size(), ErrorCode::kDimensionMismatch,
          "weighted_sum: weight count differs from vector count");
  bool any_nonzero = false;
  for (double w : weights) {
    require(std::isfinite(w), ErrorCode::kNonFinite,
            "weighted_sum: non-finite weight");
    any_nonzero = any_nonzero || w != 0.0;
  }
  require(any_nonzero, ErrorCode::kInvalidArgument,
          "weighted_sum: all weights are zero");

  std::vector<double> out(vecs.front().dim(), 0.0);
  for (std::size_t j = 0; j < vecs.size(); ++j) {
    const std::span<const double> v = vecs[j].values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += weights[j] * v[k];
  }
  return ParamVec(std::move(out));
}

ParamVec weighted_sum(std::span<const ParamVec> vecs,
                      std::span<const double> weights,
                      std::span<const int> order_keys) {
  require(order_keys.size() == vecs.size(), ErrorCode::kDimensionMismatch,
          "weighted_sum: key count differs from vector count");
  require(weights.size() == vecs.size(), ErrorCode::kDimensionMismatch,
          "weighted_sum: weight count differs from vector count");
  std::vector<std::size_t> order(vecs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return order_keys[a] < order_keys[b];
  });
  std::vector<ParamVec> sorted_vecs;
  std::vector<double> sorted_weights;
  sorted_vecs.reserve(vecs.size());
  sorted_weights.reserve(vecs.size());
  for (std::size_t j : order) {
    sorted_vecs.push_back(vecs[j]);
    sorted_weights.push_back(weights[j]);
  }
  return weighted_sum(sorted_vecs, sorted_weights);
}

ParamVec coord_median(std::span<const ParamVec> vecs) {
  check_same_dims(vecs, "coord_median");
  const std::size_t m = vecs.size();
  std::vector<double> out(vecs.front().dim());
  std::vector<double> column;
  column.reserve(m);
  for (std::size_t k = 0; k < out.size(); ++k) {
    sorted_column(vecs, k, column);
    out[k] = (m % 2 == 1) ? column[m / 2]
                          : 0.5 * (column[m / 2 - 1] + column[m / 2]);
  }
  return ParamVec(std::move(out));
}

ParamVec coord_trimmed_mean(std::span<const ParamVec> vecs, double trim_frac) {
  check_same_dims(vecs, "coord_trimmed_mean");
  require(trim_frac >= 0.0 && trim_frac < 0.5, ErrorCode::kInvalidArgument,
          "coord_trimmed_mean: trim_frac must lie in [0, 0.5)");
  const std::size_t m = vecs.size();
  const auto k = static_cast<std::size_t>(std::floor(trim_frac * static_cast<double>(m)));
  require(2 * k < m, ErrorCode::kInvalidArgument,
          "coord_trimmed_mean: trimming removes every value");
  const std::size_t kept = m - 2 * k;
  std::vector<double> out(vecs.front().dim());
  std::vector<double> column;
  column.reserve(m);
  for (std::size_t c = 0; c < out.size(); ++c) {
    sorted_column(vecs, c, column);
    double sum = 0.0;
    for (std::size_t j = k; j < m - k; ++j) sum += column[j];
    out[c] = sum / static_cast<double>(kept);
  }
  return ParamVec(std::move(out));
}

double l2_dist(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::kDimensionMismatch,
          "l2_dist: dimension mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double linf_dist(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::kDimensionMismatch,
          "linf_dist: dimension mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return worst;
}

}  // namespace fedsim
