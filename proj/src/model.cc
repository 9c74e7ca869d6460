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

#include "hfl/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hfl/rng.hpp"
#include "json.hpp"

namespace hfl::learning {
namespace {

// Writes softmax probabilities over `logits` in place and returns -log p[label].
double softmax_xent(std::span<double> logits, std::size_t label) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) {
    l = std::exp(l - mx);
    z += l;
  }
  for (double& l : logits) l /= z;
  return -(std::log(logits[label]));
}

void check_shapes(const ModelSpec& spec, std::span<const double> params, const Dataset& data) {
  spec.validate();
  if (params.size() != spec.param_count())
    throw std::invalid_argument("model: parameter vector has the wrong length");
  if (data.n_features != spec.n_features)
    throw std::invalid_argument("model: dataset feature count does not match the model");
}

// Logits of one sample; `hidden` receives post-activation values for kMlp.
void forward(const ModelSpec& spec, std::span<const double> w, std::span<const double> x,
             std::span<double> hidden, std::span<double> logits) {
  const std::size_t f = spec.n_features;
  const std::size_t c = spec.n_classes;
  if (spec.kind == ModelKind::kSoftmaxLinear) {
    const double* bias = w.data() + c * f;
    for (std::size_t j = 0; j < c; ++j) {
      double s = bias[j];
      const double* row = w.data() + j * f;
      for (std::size_t i = 0; i < f; ++i) s += row[i] * x[i];
      logits[j] = s;
    }
    return;
  }
  const std::size_t h = spec.hidden_dim;
  const double* w1 = w.data();
  const double* b1 = w1 + h * f;
  const double* w2 = b1 + h;
  const double* b2 = w2 + c * h;
  for (std::size_t j = 0; j < h; ++j) {
    double s = b1[j];
    const double* row = w1 + j * f;
    for (std::size_t i = 0; i < f; ++i) s += row[i] * x[i];
    hidden[j] = s > 0.0 ? s : 0.0;
  }
  for (std::size_t j = 0; j < c; ++j) {
    double s = b2[j];
    const double* row = w2 + j * h;
    for (std::size_t i = 0; i < h; ++i) s += row[i] * hidden[i];
    logits[j] = s;
  }
}

}  // namespace

ModelSpec ModelSpec::softmax_linear(std::size_t n_features, std::size_t n_classes) {
  return {ModelKind::kSoftmaxLinear, n_features, n_classes, 0};
}

ModelSpec ModelSpec::mlp(std::size_t n_features, std::size_t hidden_dim, std::size_t n_classes) {
  return {ModelKind::kMlp, n_features, n_classes, hidden_dim};
}

std::size_t ModelSpec::param_count() const {
  if (kind == ModelKind::kSoftmaxLinear) return n_classes * n_features + n_classes;
  return hidden_dim * n_features + hidden_dim + n_classes * hidden_dim + n_classes;
}

void ModelSpec::validate() const {
  if (n_features < 1) throw std::invalid_argument("model: n_features must be >= 1");
  if (n_classes < 2) throw std::invalid_argument("model: n_classes must be >= 2");
  if (kind == ModelKind::kMlp && hidden_dim < 1)
    throw std::invalid_argument("model: hidden_dim must be >= 1");
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kSoftmaxLinear ? "softmax_linear" : "mlp";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "softmax_linear") return ModelKind::kSoftmaxLinear;
  if (name == "mlp") return ModelKind::kMlp;
  throw std::invalid_argument("unknown model kind: " + name);
}

std::vector<double> init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<double> w(spec.param_count(), 0.0);
  if (spec.kind == ModelKind::kSoftmaxLinear) return w;
  Rng rng(seed);
  const std::size_t f = spec.n_features;
  const std::size_t h = spec.hidden_dim;
  const double s1 = std::sqrt(2.0 / static_cast<double>(f));
  const double s2 = std::sqrt(1.0 / static_cast<double>(h));
  for (std::size_t i = 0; i < h * f; ++i) w[i] = s1 * rng.normal();
  const std::size_t w2 = h * f + h;
  for (std::size_t i = 0; i < spec.n_classes * h; ++i) w[w2 + i] = s2 * rng.normal();
  return w;
}

LossGrad forward_loss_grad(const ModelSpec& spec, std::span<const double> params,
                           const Dataset& data, std::span<const std::size_t> batch,
                           double weight_decay) {
  check_shapes(spec, params, data);
  if (batch.empty()) throw std::invalid_argument("forward_loss_grad: empty batch");
  const std::size_t f = spec.n_features;
  const std::size_t c = spec.n_classes;
  const std::size_t h = spec.hidden_dim;

  LossGrad out;
  out.grad.assign(params.size(), 0.0);
  std::vector<double> hidden(h);
  std::vector<double> dhidden(h);
  std::vector<double> logits(c);
  for (std::size_t idx : batch) {
    const auto x = data.row(idx);
    const std::size_t label = data.labels[idx];
    forward(spec, params, x, hidden, logits);
    out.loss += softmax_xent(logits, label);
    logits[label] -= 1.0;  // now dLoss/dlogits

    if (spec.kind == ModelKind::kSoftmaxLinear) {
      double* gw = out.grad.data();
      double* gb = gw + c * f;
      for (std::size_t j = 0; j < c; ++j) {
        double* row = gw + j * f;
        for (std::size_t i = 0; i < f; ++i) row[i] += logits[j] * x[i];
        gb[j] += logits[j];
      }
      continue;
    }
    double* gw1 = out.grad.data();
    double* gb1 = gw1 + h * f;
    double* gw2 = gb1 + h;
    double* gb2 = gw2 + c * h;
    const double* w2 = params.data() + h * f + h;
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t j = 0; j < c; ++j) {
      double* grow = gw2 + j * h;
      const double* wrow = w2 + j * h;
      for (std::size_t i = 0; i < h; ++i) {
        grow[i] += logits[j] * hidden[i];
        dhidden[i] += logits[j] * wrow[i];
      }
      gb2[j] += logits[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
      if (hidden[j] <= 0.0) continue;
      double* row = gw1 + j * f;
      for (std::size_t i = 0; i < f; ++i) row[i] += dhidden[j] * x[i];
      gb1[j] += dhidden[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.grad[i] = out.grad[i] * inv + weight_decay * params[i];
    sq += params[i] * params[i];
  }
  out.loss += 0.5 * weight_decay * sq;
  return out;
}

std::size_t predict(const ModelSpec& spec, std::span<const double> params,
                    std::span<const double> features) {
  std::vector<double> hidden(spec.hidden_dim);
  std::vector<double> logits(spec.n_classes);
  forward(spec, params, features, hidden, logits);
  return static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double evaluate(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
                std::span<const std::size_t> indices) {
  check_shapes(spec, params, data);
  std::size_t correct = 0;
  std::size_t total = 0;
  auto score = [&](std::size_t i) {
    correct += predict(spec, params, data.row(i)) == data.labels[i] ? 1 : 0;
    ++total;
  };
  if (indices.empty()) {
    for (std::size_t i = 0; i < data.size(); ++i) score(i);
  } else {
    for (std::size_t i : indices) score(i);
  }
  if (total == 0) throw std::invalid_argument("evaluate: empty partition");
  return static_cast<double>(correct) / static_cast<double>(total);
}

void save_checkpoint(const std::string& path, const ModelSpec& spec,
                     std::span<const double> params) {
  static_assert(std::endian::native == std::endian::little, "checkpoints are little-endian");
  if (params.size() != spec.param_count())
    throw std::invalid_argument("save_checkpoint: parameter count mismatch");
  nlohmann::json header = {
      {"kind", to_string(spec.kind)},   {"n_features", spec.n_features},
      {"n_classes", spec.n_classes},    {"hidden_dim", spec.hidden_dim},
      {"param_count", params.size()},   {"dtype", "float64-le"},
  };
  std::ofstream h(path + ".json");
  h << header.dump(2) << "\n";
  std::ofstream b(path + ".bin", std::ios::binary);
  b.write(reinterpret_cast<const char*>(params.data()),
          static_cast<std::streamsize>(params.size() * sizeof(double)));
  if (!h || !b) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

std::vector<double> load_checkpoint(const std::string& path, ModelSpec* spec) {
  std::ifstream h(path + ".json");
  if (!h) throw std::runtime_error("load_checkpoint: cannot open " + path + ".json");
  const auto header = nlohmann::json::parse(h);
  ModelSpec s{model_kind_from_string(header.at("kind").get<std::string>()),
              header.at("n_features").get<std::size_t>(), header.at("n_classes").get<std::size_t>(),
              header.at("hidden_dim").get<std::size_t>()};
  const auto count = header.at("param_count").get<std::size_t>();
  if (count != s.param_count()) throw std::runtime_error("load_checkpoint: inconsistent header");
  std::vector<double> params(count);
  std::ifstream b(path + ".bin", std::ios::binary);
  b.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!b) throw std::runtime_error("load_checkpoint: truncated " + path + ".bin");
  if (spec != nullptr) *spec = s;
  return params;
}

}  // namespace hfl::learning
