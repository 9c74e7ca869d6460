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

#ifndef HFL_DATASET_HPP_
#define HFL_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hfl::learning {

struct Dataset {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<double> features;  // row-major, size() x n_features
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features, n_features};
  }
};

struct GaussianMixtureConfig {
  std::size_t n_train = 20000;
  std::size_t n_test = 4000;
  std::size_t n_features = 32;
  std::size_t n_classes = 4;
  // Distance of every class mean from the origin, in units of the (unit)
  // per-feature noise.
  double mean_radius = 1.5;
  std::uint64_t seed = 1;
};

// Labels are drawn i.i.d. uniformly, so contiguous shards are i.i.d. too.
// Class means are shared between the train and test splits.
std::pair<Dataset, Dataset> make_gaussian_mixture(const GaussianMixtureConfig& cfg);

// CSV rows of `label,f1,...,fn`. A first line whose first field is not an
// integer is treated as a header. n_classes = max label + 1.
Dataset load_csv(const std::string& path);

// Splits [0, n_samples) into `parts` contiguous shards, in order and without
// shuffling. Sizes differ by at most one.
std::vector<std::vector<std::size_t>> contiguous_shards(std::size_t n_samples, std::size_t parts);

}  // namespace hfl::learning

#endif  // HFL_DATASET_HPP_
