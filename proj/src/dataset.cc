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

#include "hfl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hfl/rng.hpp"

namespace hfl::learning {
namespace {

void fill(Dataset& d, std::size_t n, const std::vector<std::vector<double>>& means, Rng& rng) {
  d.features.reserve(n * d.n_features);
  d.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng.below(d.n_classes);
    d.labels.push_back(c);
    for (std::size_t f = 0; f < d.n_features; ++f) d.features.push_back(means[c][f] + rng.normal());
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

bool parse_label(const std::string& s, std::size_t* out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && *begin == ' ') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::pair<Dataset, Dataset> make_gaussian_mixture(const GaussianMixtureConfig& cfg) {
  if (cfg.n_features < 1 || cfg.n_classes < 2 || cfg.n_train < 1)
    throw std::invalid_argument("gaussian mixture: need >= 1 feature, >= 2 classes, >= 1 sample");
  Rng mean_rng(derive_seed(cfg.seed, {0x6d65616e73ULL}));
  std::vector<std::vector<double>> means(cfg.n_classes, std::vector<double>(cfg.n_features));
  for (auto& m : means) {
    double norm = 0.0;
    for (double& x : m) {
      x = mean_rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : m) x *= cfg.mean_radius / norm;
  }
  Dataset train{cfg.n_features, cfg.n_classes, {}, {}};
  Dataset test{cfg.n_features, cfg.n_classes, {}, {}};
  Rng train_rng(derive_seed(cfg.seed, {0x747261696eULL}));
  Rng test_rng(derive_seed(cfg.seed, {0x74657374ULL}));
  fill(train, cfg.n_train, means, train_rng);
  fill(test, cfg.n_test, means, test_rng);
  return {std::move(train), std::move(test)};
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    std::size_t label = 0;
    if (!parse_label(fields[0], &label)) {
      if (line_no == 1) continue;
      throw std::runtime_error("load_csv: bad label on line " + std::to_string(line_no));
    }
    if (d.n_features == 0) d.n_features = fields.size() - 1;
    if (fields.size() - 1 != d.n_features || d.n_features == 0)
      throw std::runtime_error("load_csv: wrong field count on line " + std::to_string(line_no));
    for (std::size_t f = 1; f < fields.size(); ++f) {
      try {
        d.features.push_back(std::stod(fields[f]));
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: bad number on line " + std::to_string(line_no));
      }
    }
    d.labels.push_back(label);
    d.n_classes = std::max(d.n_classes, label + 1);
  }
  if (d.labels.empty()) throw std::runtime_error("load_csv: no samples in " + path);
  return d;
}

std::vector<std::vector<std::size_t>> contiguous_shards(std::size_t n_samples, std::size_t parts) {
  if (parts < 1) throw std::invalid_argument("contiguous_shards: parts must be >= 1");
  std::vector<std::vector<std::size_t>> shards(parts);
  const std::size_t base = n_samples / parts;
  const std::size_t extra = n_samples % parts;
  std::size_t next = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i) shards[p].push_back(next++);
  }
  return shards;
}

}  // namespace hfl::learning
