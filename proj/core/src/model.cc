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

#include "fedsim/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsim/error.h"
#include "fedsim/random.h"

namespace fedsim {
namespace {

constexpr double kFiniteDiffStep = 1e-5;

struct Layout {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
};

Layout layout_of(const ModelArch& arch) {
  const std::size_t d = arch.input_dim;
  const auto c = static_cast<std::size_t>(arch.num_classes);
  Layout l;
  if (arch.kind == ModelKind::kLogistic) {
    l.w1 = 0;
    l.b1 = c * d;
    l.total = c * d + c;
  } else {
    const std::size_t h = arch.hidden_dim;
    l.w1 = 0;
    l.b1 = h * d;
    l.w2 = l.b1 + h;
    l.b2 = l.w2 + c * h;
    l.total = l.b2 + c;
  }
  return l;
}

void check_inputs(const ModelArch& arch, const ParamVec& params, std::span<const double> x) {
  require(params.dim() == arch.param_dim(), ErrorCode::kDimensionMismatch,
          "model: parameter dimension " + std::to_string(params.dim()) + " != " +
              std::to_string(arch.param_dim()));
  require(x.size() == arch.input_dim, ErrorCode::kDimensionMismatch,
          "model: input dimension mismatch");
}

// Forward pass. `hidden` receives tanh activations for mlp1.
void forward(const ModelArch& arch, const Layout& l, const double* p,
             std::span<const double> x, std::vector<double>& hidden,
             std::vector<double>& logits) {
  const std::size_t d = arch.input_dim;
  const auto c = static_cast<std::size_t>(arch.num_classes);
  logits.assign(c, 0.0);
  if (arch.kind == ModelKind::kLogistic) {
    for (std::size_t j = 0; j < c; ++j) {
      const double* w = p + l.w1 + j * d;
      double z = p[l.b1 + j];
      for (std::size_t k = 0; k < d; ++k) z += w[k] * x[k];
      logits[j] = z;
    }
    return;
  }
  const std::size_t h = arch.hidden_dim;
  hidden.assign(h, 0.0);
  for (std::size_t u = 0; u < h; ++u) {
    const double* w = p + l.w1 + u * d;
    double z = p[l.b1 + u];
    for (std::size_t k = 0; k < d; ++k) z += w[k] * x[k];
    hidden[u] = std::tanh(z);
  }
  for (std::size_t j = 0; j < c; ++j) {
    const double* w = p + l.w2 + j * h;
    double z = p[l.b2 + j];
    for (std::size_t u = 0; u < h; ++u) z += w[u] * hidden[u];
    logits[j] = z;
  }
}

// In-place softmax; returns log-sum-exp of the input logits.
double softmax_inplace(std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : z) v /= total;
  return top + std::log(total);
}

// Adds scale * d(loss)/d(params) for one sample into `grad`; returns the loss.
double accumulate_gradient(const ModelArch& arch, const Layout& l, const double* p,
                           std::span<const double> x, int label, double scale,
                           std::vector<double>& hidden, std::vector<double>& logits,
                           std::vector<double>& dhidden, double* grad) {
  forward(arch, l, p, x, hidden, logits);
  const double label_logit = logits[static_cast<std::size_t>(label)];
  const double lse = softmax_inplace(logits);
  const double loss = lse - label_logit;
  logits[static_cast<std::size_t>(label)] -= 1.0;  // now dloss/dlogits

  const std::size_t d = arch.input_dim;
  const auto c = static_cast<std::size_t>(arch.num_classes);
  if (arch.kind == ModelKind::kLogistic) {
    for (std::size_t j = 0; j < c; ++j) {
      const double g = scale * logits[j];
      double* gw = grad + l.w1 + j * d;
      for (std::size_t k = 0; k < d; ++k) gw[k] += g * x[k];
      grad[l.b1 + j] += g;
    }
    return loss;
  }
  const std::size_t h = arch.hidden_dim;
  dhidden.assign(h, 0.0);
  for (std::size_t j = 0; j < c; ++j) {
    const double g = scale * logits[j];
    const double* w = p + l.w2 + j * h;
    double* gw = grad + l.w2 + j * h;
    for (std::size_t u = 0; u < h; ++u) {
      gw[u] += g * hidden[u];
      dhidden[u] += g * w[u];
    }
    grad[l.b2 + j] += g;
  }
  for (std::size_t u = 0; u < h; ++u) {
    const double dz = dhidden[u] * (1.0 - hidden[u] * hidden[u]);
    double* gw = grad + l.w1 + u * d;
    for (std::size_t k = 0; k < d; ++k) gw[k] += dz * x[k];
    grad[l.b1 + u] += dz;
  }
  return loss;
}

}  // namespace

std::size_t ModelArch::param_dim() const { return layout_of(*this).total; }

void ModelArch::validate() const {
  require(input_dim > 0, ErrorCode::kInvalidArgument, "arch: input_dim must be positive");
  require(num_classes >= 2, ErrorCode::kInvalidArgument, "arch: num_classes must be >= 2");
  require(kind == ModelKind::kLogistic || hidden_dim > 0, ErrorCode::kInvalidArgument,
          "arch: hidden_dim must be positive for mlp1");
}

void LocalTrainConfig::validate() const {
  require(local_epochs >= 1, ErrorCode::kInvalidArgument, "local_epochs must be >= 1");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, ErrorCode::kInvalidArgument,
          "learning_rate must be finite and non-negative");
}

ParamVec init_params(const ModelArch& arch, std::uint64_t seed) {
  arch.validate();
  const Layout l = layout_of(arch);
  std::vector<double> p(l.total, 0.0);
  Rng rng(seed);
  const auto fill = [&](std::size_t offset, std::size_t fan_out, std::size_t fan_in) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_out * fan_in; ++i) p[offset + i] = rng.uniform(-a, a);
  };
  const auto c = static_cast<std::size_t>(arch.num_classes);
  if (arch.kind == ModelKind::kLogistic) {
    fill(l.w1, c, arch.input_dim);
  } else {
    fill(l.w1, arch.hidden_dim, arch.input_dim);
    fill(l.w2, c, arch.hidden_dim);
  }
  return ParamVec(std::move(p));
}

std::vector<double> predict_proba(const ModelArch& arch, const ParamVec& params,
                                  std::span<const double> x) {
  check_inputs(arch, params, x);
  std::vector<double> hidden, logits;
  forward(arch, layout_of(arch), params.values().data(), x, hidden, logits);
  softmax_inplace(logits);
  return logits;
}

double sample_loss(const ModelArch& arch, const ParamVec& params,
                   std::span<const double> x, int label) {
  check_inputs(arch, params, x);
  require(label >= 0 && label < arch.num_classes, ErrorCode::kInvalidArgument,
          "model: label out of range");
  std::vector<double> hidden, logits;
  forward(arch, layout_of(arch), params.values().data(), x, hidden, logits);
  const double label_logit = logits[static_cast<std::size_t>(label)];
  return softmax_inplace(logits) - label_logit;
}

std::vector<double> sample_gradient(const ModelArch& arch, const ParamVec& params,
                                    std::span<const double> x, int label) {
  check_inputs(arch, params, x);
  require(label >= 0 && label < arch.num_classes, ErrorCode::kInvalidArgument,
          "model: label out of range");
  const Layout l = layout_of(arch);
  std::vector<double> grad(l.total, 0.0);
  std::vector<double> hidden, logits, dhidden;
  accumulate_gradient(arch, l, params.values().data(), x, label, 1.0, hidden, logits,
                      dhidden, grad.data());
  return grad;
}

ParamVec train_local(const ModelArch& arch, const ParamVec& params, const Dataset& data,
                     const LocalTrainConfig& cfg) {
  cfg.validate();
  require(!data.empty(), ErrorCode::kInvalidArgument, "train_local: empty shard");
  require(data.input_dim == arch.input_dim, ErrorCode::kDimensionMismatch,
          "train_local: dataset input_dim does not match arch");
  require(params.dim() == arch.param_dim(), ErrorCode::kDimensionMismatch,
          "train_local: parameter dimension mismatch");
  if (cfg.learning_rate == 0.0) return params;

  const Layout l = layout_of(arch);
  std::vector<double> w = params.to_vector();
  std::vector<double> grad(l.total);
  std::vector<double> hidden, logits, dhidden;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        accumulate_gradient(arch, l, w.data(), data.row(i), data.labels[i], scale, hidden,
                            logits, dhidden, grad.data());
      }
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * grad[k];
    }
  }
  require(std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); }),
          ErrorCode::kNonFinite, "train_local: parameters diverged");
  return ParamVec(std::move(w));
}

EvalResult evaluate(const ModelArch& arch, const ParamVec& params, const Dataset& data) {
  require(!data.empty(), ErrorCode::kInvalidArgument, "evaluate: empty dataset");
  require(data.input_dim == arch.input_dim, ErrorCode::kDimensionMismatch,
          "evaluate: dataset input_dim does not match arch");
  require(params.dim() == arch.param_dim(), ErrorCode::kDimensionMismatch,
          "evaluate: parameter dimension mismatch");
  const Layout l = layout_of(arch);
  std::vector<double> hidden, logits;
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward(arch, l, params.values().data(), data.row(i), hidden, logits);
    const auto label = static_cast<std::size_t>(data.labels[i]);
    const auto best = static_cast<std::size_t>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    if (best == label) ++correct;
    const double label_logit = logits[label];
    loss += softmax_inplace(logits) - label_logit;
  }
  const auto n = static_cast<double>(data.size());
  return EvalResult{loss / n, static_cast<double>(correct) / n};
}

double numeric_grad_check(const ModelArch& arch, const ParamVec& params,
                          std::span<const double> x, int label) {
  const std::vector<double> analytic = sample_gradient(arch, params, x, label);
  ParamVec probe = params;
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.dim(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + kFiniteDiffStep;
    const double up = sample_loss(arch, probe, x, label);
    probe[k] = orig - kFiniteDiffStep;
    const double down = sample_loss(arch, probe, x, label);
    probe[k] = orig;
    const double numeric = (up - down) / (2.0 * kFiniteDiffStep);
    worst = std::max(worst, std::abs(numeric - analytic[k]));
  }
  return worst;
}

}  // namespace fedsim
