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

// Experiment configuration, presets, and the sweep runners behind hfl-sim.

#ifndef HFL_SIM_HPP_
#define HFL_SIM_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfl/channel.hpp"
#include "hfl/dataset.hpp"
#include "hfl/latency.hpp"
#include "hfl/model.hpp"
#include "hfl/sparsify.hpp"
#include "hfl/topology.hpp"
#include "hfl/training.hpp"
#include "json.hpp"

namespace hfl::sim {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment {
  kLatencySpeedupVsMus,
  kLatencySpeedupVsAlpha,
  kSparsitySpeedup,
  kTrainingRun,
};

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct PayloadConfig {
  std::uint64_t q_params = 11'000'000;  // Q
  std::uint32_t q_bits = 32;            // bits per value
};

struct DatasetConfig {
  std::size_t n_train = 20000;
  std::size_t n_test = 4000;
  std::size_t n_features = 32;
  std::size_t n_classes = 4;
  double mean_radius = 1.5;
  // Optional CSV files; when both are set they replace the synthetic task.
  std::string train_csv;
  std::string test_csv;
};

struct TrainingConfig {
  learning::ModelKind model = learning::ModelKind::kSoftmaxLinear;
  std::size_t hidden_dim = 32;
  DatasetConfig dataset;
  learning::TrainConfig train;
};

struct SweepConfig {
  std::vector<std::size_t> periods{2, 4, 6};
  std::vector<std::size_t> mus_per_cluster{2, 4, 8};
  std::vector<double> alphas{2.0, 2.4, 2.8, 3.2};
  // baseline | fl | hfl | sparse_fl | sparse_hfl
  std::vector<std::string> algorithms{"baseline", "sparse_hfl"};
  std::vector<std::uint64_t> seeds;  // training runs; empty means {seed}
};

struct SimConfig {
  std::string preset = "table2";
  Experiment experiment = Experiment::kLatencySpeedupVsMus;
  std::uint64_t seed = 1;
  topology::LayoutConfig layout;
  channel::RadioParams radio;
  latency::LatencyConfig latency;
  PayloadConfig payload;
  sparsify::SparsifierConfig sparsity;
  std::optional<std::size_t> n_colors;  // overrides the layout coloring
  TrainingConfig training;
  SweepConfig sweep;
  std::string output_dir = "out";
};

// Every violated constraint, each prefixed by its field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

std::vector<std::string> preset_names();
// Full JSON document of a built-in preset. Throws ConfigError if unknown.
nlohmann::json preset_json(const std::string& name);

// Applies `key.path=value` to `doc`. The value is parsed as JSON when
// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Parses JSON text, layers it over its preset, and checks every field.
SimConfig validate_config(const std::string& raw,
                          const std::vector<std::string>& overrides = {});
SimConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SimConfig& cfg);

// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const SimConfig& cfg);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180 text with CRLF line ends.
std::string to_csv(const Table& table);
// Shortest round-trip representation.
std::string format_number(double x);

struct Report {
  Table table;
  nlohmann::json manifest;
};

struct LatencyPoint {
  std::size_t n_colors = 0;
  double t_fl = 0.0;
  double gamma_hfl = 0.0;
  double speedup = 0.0;
};

// T^FL and Gamma^HFL for one layout and payload set.
LatencyPoint latency_point(const SimConfig& cfg, std::size_t mus_per_cluster, std::size_t period,
                           double alpha, const latency::HopPayloads& payloads);

Report run_experiment(const SimConfig& cfg);

// Writes <dir>/<experiment>.csv and <dir>/<experiment>.manifest.json, each
// through a temporary file and a rename. Returns the CSV path.
std::string write_report(const Report& report, const std::string& dir, Experiment experiment);

}  // namespace hfl::sim

#endif  // HFL_SIM_HPP_
