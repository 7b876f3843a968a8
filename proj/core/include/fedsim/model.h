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

#ifndef FEDSIM_MODEL_H_
#define FEDSIM_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedsim/data.h"
#include "fedsim/param_math.h"

namespace fedsim {

enum class ModelKind { kLogistic, kMlp1 };

// Architecture of a small softmax classifier.
//
// Parameter layout (row-major weight matrices, output-major):
//   logistic: W[num_classes x input_dim], b[num_classes]
//   mlp1:     W1[hidden x input_dim], b1[hidden], W2[num_classes x hidden],
//             b2[num_classes]; hidden activation is tanh.
struct ModelArch {
  ModelKind kind = ModelKind::kLogistic;
  std::size_t input_dim = 8;
  std::size_t hidden_dim = 16;  // mlp1 only
  int num_classes = 4;

  std::size_t param_dim() const;
  void validate() const;

  friend bool operator==(const ModelArch&, const ModelArch&) = default;
};

struct LocalTrainConfig {
  int local_epochs = 1;
  double learning_rate = 0.05;
  int batch_size = 16;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const LocalTrainConfig&, const LocalTrainConfig&) = default;
};

struct EvalResult {
  double loss = 0.0;      // mean cross-entropy
  double accuracy = 0.0;  // correct / total
};

// Glorot-uniform weights, a = sqrt(6 / (fan_in + fan_out)) per layer; zero biases.
ParamVec init_params(const ModelArch& arch, std::uint64_t seed);

// Class probabilities for one input (max-subtracted softmax).
std::vector<double> predict_proba(const ModelArch& arch, const ParamVec& params,
                                  std::span<const double> x);

// Cross-entropy of one labeled sample.
double sample_loss(const ModelArch& arch, const ParamVec& params,
                   std::span<const double> x, int label);

// Analytic gradient of sample_loss with respect to every parameter.
std::vector<double> sample_gradient(const ModelArch& arch, const ParamVec& params,
                                    std::span<const double> x, int label);

// cfg.local_epochs full passes of plain mini-batch SGD over `data`, batches
// drawn from a per-epoch shuffle seeded by cfg.seed. The last batch of an
// epoch may be short.
ParamVec train_local(const ModelArch& arch, const ParamVec& params, const Dataset& data,
                     const LocalTrainConfig& cfg);

// Argmax ties resolve to the lowest class index.
EvalResult evaluate(const ModelArch& arch, const ParamVec& params, const Dataset& data);

// Max |analytic - central difference| over all coordinates, h = 1e-5.
double numeric_grad_check(const ModelArch& arch, const ParamVec& params,
                          std::span<const double> x, int label);

}  // namespace fedsim

#endif  // FEDSIM_MODEL_H_
