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

#ifndef FEDSIM_PARAM_MATH_H_
#define FEDSIM_PARAM_MATH_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedsim {

// Flat dense parameter vector: all weights of one model, or one client's
// submitted model. Entries are finite.
class ParamVec {
 public:
  ParamVec() = default;
  explicit ParamVec(std::size_t dim, double fill = 0.0);
  // Throws kNonFinite if any entry is NaN or infinite.
  explicit ParamVec(std::vector<double> values);
  ParamVec(std::initializer_list<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values() noexcept { return values_; }
  const std::vector<double>& to_vector() const noexcept { return values_; }

  bool all_finite() const noexcept;

  friend bool operator==(const ParamVec&, const ParamVec&) = default;

 private:
  std::vector<double> values_;
};

// out[k] = sum_j weights[j] * vecs[j][k], accumulated in input order.
ParamVec weighted_sum(std::span<const ParamVec> vecs,
                      std::span<const double> weights);

// Same, but accumulation happens in ascending `order_keys` (client index)
// order, so any joint permutation of the inputs gives a bit-identical result.
ParamVec weighted_sum(std::span<const ParamVec> vecs,
                      std::span<const double> weights,
                      std::span<const int> order_keys);

// Coordinate-wise median; even counts take the midpoint of the two middle
// order statistics.
ParamVec coord_median(std::span<const ParamVec> vecs);

// Coordinate-wise mean after dropping the k = floor(trim_frac * m) smallest
// and k largest values. Requires 2k < m.
ParamVec coord_trimmed_mean(std::span<const ParamVec> vecs, double trim_frac);

double l2_dist(std::span<const double> a, std::span<const double> b);
double linf_dist(std::span<const double> a, std::span<const double> b);

inline double l2_dist(const ParamVec& a, const ParamVec& b) {
  return l2_dist(a.values(), b.values());
}
inline double linf_dist(const ParamVec& a, const ParamVec& b) {
  return linf_dist(a.values(), b.values());
}

}  // namespace fedsim

#endif  // FEDSIM_PARAM_MATH_H_
