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

// The four training loops: FL, HFL, sparse FL, and sparse HFL with reference
// models and discounted error accumulation. Step functions take a gradient
// callback so they can be driven by real data or by scripted gradients.

#ifndef HFL_TRAINING_HPP_
#define HFL_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hfl/dataset.hpp"
#include "hfl/model.hpp"
#include "hfl/sparsify.hpp"
#include "hfl/topology.hpp"
#include "json.hpp"

namespace hfl::learning {

enum class Algorithm { kFL, kHFL, kSparseFL, kSparseHFL };
enum class Aggregate { kMean, kSum };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Aggregate a);
Aggregate aggregate_from_string(const std::string& name);

// Linear warm-up over the first `warmup_epochs` (per iteration), then a
// multiplicative drop at the start of each epoch listed in `decay_epochs`.
struct LrSchedule {
  double base = 0.25;
  std::size_t warmup_epochs = 0;
  std::vector<std::size_t> decay_epochs;
  double decay_factor = 0.1;

  // `iteration` counts from 1.
  double at(std::size_t iteration, std::size_t steps_per_epoch) const;
};

struct TrainConfig {
  std::size_t batch_size = 64;
  LrSchedule lr;
  double momentum = 0.9;  // sigma
  double weight_decay = 1e-4;
  std::size_t period = 4;  // H
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  sparsify::SparsifierConfig sparsifier;
  Aggregate fl_aggregate = Aggregate::kSum;    // sparse FL: MBS combine of MU payloads
  Aggregate sbs_aggregate = Aggregate::kMean;  // sparse HFL: SBS combine of MU payloads
  Aggregate mbs_aggregate = Aggregate::kMean;  // sparse HFL: MBS combine of SBS differences
  std::uint32_t q_bits = 32;
  std::uint32_t index_bits = 0;  // 0 selects ceil(log2 Q)

  void validate() const;
};

// MU to cluster assignment.
struct Clustering {
  std::vector<std::size_t> cluster_of_mu;
  std::size_t n_clusters = 1;

  static Clustering single(std::size_t n_mus);
  static Clustering uniform(std::size_t n_clusters, std::size_t mus_per_cluster);
  static Clustering from_layout(const topology::NetworkLayout& layout);

  std::size_t n_mus() const { return cluster_of_mu.size(); }
  std::vector<std::size_t> members(std::size_t cluster) const;
};

// Bits transmitted per hop, counted once per sender transmission.
struct HopBits {
  std::uint64_t mu_ul = 0;
  std::uint64_t sbs_dl = 0;
  std::uint64_t sbs_ul = 0;
  std::uint64_t mbs_dl = 0;

  friend bool operator==(const HopBits&, const HopBits&) = default;
};

struct MuState {
  std::vector<double> w;
  std::vector<double> momentum;  // dense algorithms
  sparsify::ErrorBuffers buffers;  // sparse algorithms
};

struct SbsState {
  std::vector<double> model;      // W_n
  std::vector<double> reference;  // last model known to the MUs
  std::vector<double> dl_error;   // residual of the SBS -> MU difference
  std::vector<double> ul_error;   // residual of the SBS -> MBS difference
};

struct MbsState {
  std::vector<double> reference;  // last model known to the SBSs
  std::vector<double> error;      // residual of the MBS -> SBS difference
};

struct TrainState {
  std::vector<MuState> mus;
  std::vector<SbsState> sbs;
  MbsState mbs;
  std::size_t iteration = 0;  // completed iterations
  std::size_t syncs = 0;      // completed global averaging rounds
  HopBits bits;

  static TrainState init(std::span<const double> w0, std::size_t n_mus, std::size_t n_clusters);
  std::size_t dim() const { return mbs.reference.size(); }
  // Mean of the MU models.
  std::vector<double> consensus() const;
};

// Loss and gradient of MU `mu` evaluated at `params`.
using GradientFn = std::function<LossGrad(std::size_t mu, std::span<const double> params)>;

// Step functions return the mean loss reported by the gradient callback.

// w <- w - lr * mean_k g_k on every MU (with heavy-ball momentum).
double fl_step(TrainState& state, const GradientFn& grad, double lr, const TrainConfig& cfg);

// Cluster-mean gradient step; every `period` iterations all cluster models
// are replaced by their mean.
double hfl_step(TrainState& state, const GradientFn& grad, double lr, const TrainConfig& cfg,
                const Clustering& clusters);

// Momentum-corrected sparse uploads with error feedback; the MBS combines
// payloads per cfg.fl_aggregate.
double sparse_fl_step(TrainState& state, const GradientFn& grad, double lr,
                      const TrainConfig& cfg);

// Sparse HFL with reference models W~_n, W~ and residuals eps_n, e_n, e.
double sparse_hfl_step(TrainState& state, const GradientFn& grad, double lr,
                       const TrainConfig& cfg, const Clustering& clusters);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  HopBits bits;  // cumulative
  double simulated_seconds = 0.0;
};

struct MetricHistory {
  std::vector<EpochMetrics> epochs;

  friend bool operator==(const MetricHistory& a, const MetricHistory& b);
};

std::string to_csv(const MetricHistory& history);
nlohmann::json to_json(const MetricHistory& history);

// Simulated wall-clock cost charged per iteration and per global sync.
struct LatencyCosts {
  double per_iteration = 0.0;
  double per_sync = 0.0;
};

struct TrainResult {
  MetricHistory history;
  std::vector<double> final_params;  // consensus of the MU models
  std::size_t steps_per_epoch = 0;
};

// Shards `train_set` contiguously over the MUs, runs `cfg.epochs` epochs of
// `algorithm`, and records per-epoch metrics. FL variants ignore the cluster
// structure beyond the MU count.
TrainResult train(Algorithm algorithm, const Dataset& train_set, const Dataset& test_set,
                  const Clustering& clusters, const ModelSpec& model, const TrainConfig& cfg,
                  const LatencyCosts& costs = {},
                  std::optional<std::vector<double>> initial_params = std::nullopt);

// Closed-form cumulative bits after `iterations` iterations.
HopBits expected_bits(Algorithm algorithm, std::size_t n_mus, std::size_t n_clusters,
                      std::uint64_t q_params, const TrainConfig& cfg, std::size_t iterations);

}  // namespace hfl::learning

#endif  // HFL_TRAINING_HPP_
