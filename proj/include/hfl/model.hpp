/*
 * Copyright 2026 The hfl-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Desk-scale classifiers with hand-written gradients. Parameters live in one
// flat vector so that sparsification and averaging work on the whole model.

#ifndef HFL_MODEL_HPP_
#define HFL_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hfl/dataset.hpp"

namespace hfl::learning {

enum class ModelKind { kSoftmaxLinear, kMlp };

// Flat layout:
//   kSoftmaxLinear: W (classes x features, row-major), b (classes)
//   kMlp:           W1 (hidden x features), b1 (hidden),
//                   W2 (classes x hidden), b2 (classes); ReLU hidden layer
struct ModelSpec {
  ModelKind kind = ModelKind::kSoftmaxLinear;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::size_t hidden_dim = 0;  // kMlp only

  static ModelSpec softmax_linear(std::size_t n_features, std::size_t n_classes);
  static ModelSpec mlp(std::size_t n_features, std::size_t hidden_dim, std::size_t n_classes);

  std::size_t param_count() const;
  void validate() const;
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Zeros for the linear model; He-normal first layer and scaled-normal second
// layer for the MLP, biases zero.
std::vector<double> init_params(const ModelSpec& spec, std::uint64_t seed);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean cross-entropy over `batch` plus (weight_decay / 2) ||w||^2, and its
// exact gradient. Throws std::invalid_argument on an empty batch or a
// feature/parameter dimension mismatch.
LossGrad forward_loss_grad(const ModelSpec& spec, std::span<const double> params,
                           const Dataset& data, std::span<const std::size_t> batch,
                           double weight_decay);

// argmax of the logits, lowest class on ties.
std::size_t predict(const ModelSpec& spec, std::span<const double> params,
                    std::span<const double> features);

// Fraction of correct predictions over `indices` (all samples when empty).
double evaluate(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
                std::span<const std::size_t> indices = {});

// Writes <path>.json (shape header) and <path>.bin (little-endian float64).
void save_checkpoint(const std::string& path, const ModelSpec& spec,
                     std::span<const double> params);
std::vector<double> load_checkpoint(const std::string& path, ModelSpec* spec);

}  // namespace hfl::learning

#endif  // HFL_MODEL_HPP_
