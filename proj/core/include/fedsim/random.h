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

#ifndef FEDSIM_RANDOM_H_
#define FEDSIM_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace fedsim {

// One SplitMix64 output step applied to `x` (Steele, Lea & Flood).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed derivation used everywhere in the simulator:
//   derive_seed(base, index) = splitmix64(base XOR index)
// Nested streams chain the call, e.g. a client's training seed for round t
// is derive_seed(derive_seed(derive_seed(master, kStreamTrain), t), client).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix64(base ^ index);
}

// Stream tags separating the independent random consumers of one federation.
inline constexpr std::uint64_t kStreamHoldout = 0x686f6c646f7574ULL;    // "holdout"
inline constexpr std::uint64_t kStreamPartition = 0x706172746974ULL;    // "partit"
inline constexpr std::uint64_t kStreamInit = 0x696e6974ULL;             // "init"
inline constexpr std::uint64_t kStreamTrain = 0x747261696eULL;          // "train"
inline constexpr std::uint64_t kStreamShapley = 0x7368617031ULL;        // "shap1"
inline constexpr std::uint64_t kStreamDataset = 0x646174617365ULL;      // "datase"

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; all distributions are implemented here
// because the standard library's distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via the Marsaglia polar method.
  double normal();

  // Gamma(shape, 1) via Marsaglia & Tsang; shape < 1 uses the
  // U^(1/shape) boost.
  double gamma(double shape);

  template <typename T>
  void shuffle(std::span<T> items) {
    // Fisher-Yates, high index first.
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace fedsim

#endif  // FEDSIM_RANDOM_H_
