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

// Latency accounting for flat FL (MUs <-> MBS) and hierarchical FL (MUs <->
// SBS every iteration, SBS <-> MBS over fronthaul every H iterations).

#ifndef HFL_LATENCY_HPP_
#define HFL_LATENCY_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "hfl/allocation.hpp"
#include "hfl/channel.hpp"
#include "hfl/sparsify.hpp"
#include "hfl/topology.hpp"
#include "json.hpp"

namespace hfl::latency {

struct PayloadSpec {
  std::uint64_t q_params = 1;    // Q
  std::uint32_t q_bits = 32;     // bits per transmitted value
  double sparsity = 0.0;         // phi, fraction withheld
  std::uint32_t index_bits = 0;  // bits per transmitted index

  void validate() const;

  // Sparse payload with index_bits = ceil(log2 Q).
  static PayloadSpec with_sparsity(std::uint64_t q_params, std::uint32_t q_bits, double phi);
};

std::uint32_t default_index_bits(std::uint64_t q_params);

// Q * q_bits when dense, otherwise kept * (q_bits + index_bits).
std::uint64_t payload_bits(const PayloadSpec& spec);

// Bits sent on each of the four hops in one use of that hop.
struct HopPayloads {
  std::uint64_t ul_mu = 0;
  std::uint64_t dl_sbs = 0;
  std::uint64_t ul_sbs = 0;
  std::uint64_t dl_mbs = 0;

  static HopPayloads dense(std::uint64_t q_params, std::uint32_t q_bits);
  static HopPayloads sparse(std::uint64_t q_params, std::uint32_t q_bits,
                            const sparsify::SparsifierConfig& phis);
};

enum class BroadcastSampling {
  // Per carrier, the worst user's SNR is drawn directly: the minimum of
  // independent exponentials with means a_k is exponential with mean
  // 1 / sum(1 / a_k). Same distribution as kPerUser, one draw per carrier.
  kCollapsedMinimum,
  // One gain per user per carrier per slot.
  kPerUser,
};

struct LatencyConfig {
  double slot_duration = 1e-3;  // T_s, seconds
  double fronthaul_multiplier = 100.0;
  std::size_t mc_replicas = 16;
  BroadcastSampling sampling = BroadcastSampling::kCollapsedMinimum;
  // A replica that has not delivered the payload after this many slots
  // reports infinite latency.
  std::uint64_t max_slots = 100'000'000;

  void validate() const;
};

inline constexpr double kInfiniteLatency = std::numeric_limits<double>::infinity();

// payload / rate; kInfiniteLatency when rate is 0 and payload is not.
double ul_latency(double rate, double payload);

// Monte Carlo estimate of the rateless broadcast completion time. Each
// replica accumulates T_s * sum_m R_m(t) slot by slot until `payload` bits
// are delivered and records t * T_s; the mean over replicas is returned.
// Replica r draws from derive_seed(seed, {r}).
double broadcast_latency(double payload, std::span<const channel::LinkBudget> users,
                         std::size_t total_subcarriers, const LatencyConfig& cfg,
                         std::uint64_t seed,
                         channel::FadingKind fading = channel::FadingKind::kExponentialUnitMean);

// Expected broadcast throughput sum_m E[R_m] in bits/s, in closed form.
double broadcast_throughput(std::span<const channel::LinkBudget> users,
                            std::size_t total_subcarriers,
                            channel::FadingKind fading = channel::FadingKind::kExponentialUnitMean);

struct ClusterRound {
  double gamma_u = 0.0;
  double gamma_d = 0.0;
};

// MU -> SBS budgets of the members of `cluster`, ascending MU index.
std::vector<channel::LinkBudget> cluster_uplink_budgets(const topology::NetworkLayout& layout,
                                                        std::size_t cluster,
                                                        const channel::RadioParams& radio);
// SBS -> MU budgets (SBS power) of the members of `cluster`.
std::vector<channel::LinkBudget> cluster_downlink_budgets(const topology::NetworkLayout& layout,
                                                          std::size_t cluster,
                                                          const channel::RadioParams& radio);

// gamma_u: slowest member upload under `alloc`. gamma_d: SBS broadcast of
// dl_bits over the cluster's carrier share.
ClusterRound cluster_round_latency(const topology::NetworkLayout& layout, std::size_t cluster,
                                   const channel::RadioParams& radio,
                                   const allocation::AllocationResult& alloc, double ul_bits,
                                   double dl_bits, std::size_t cluster_subcarriers,
                                   const LatencyConfig& cfg, std::uint64_t seed);

struct LatencyBreakdown {
  std::size_t period = 1;  // H
  std::vector<double> t_ul_per_mu;
  double t_ul = 0.0;  // max of t_ul_per_mu
  double t_dl = 0.0;  // model distribution, max over clusters
  std::vector<double> gamma_u_per_cluster;  // mean over the period
  std::vector<double> gamma_d_per_cluster;  // mean over the period
  double theta_u = 0.0;
  double theta_d = 0.0;
  double gamma_period = 0.0;
  double gamma_per_iter = 0.0;
};

nlohmann::json to_json(const LatencyBreakdown& b);

// Period latency from per-cluster round latencies (rounds[n][i] for
// i < period):
//   max_n sum_i (U_n(i) + D_n(i)) + theta_u + theta_d + max_n final_dl[n]
// Fills the aggregate fields of the breakdown; t_ul_per_mu is left empty.
LatencyBreakdown period_latency(std::span<const std::vector<ClusterRound>> rounds,
                                double theta_u, double theta_d,
                                std::span<const double> final_dl, std::size_t period);

struct FlLatency {
  allocation::AllocationResult allocation;
  std::vector<double> t_ul_per_mu;
  double t_ul = 0.0;
  double t_dl = 0.0;
  double total = 0.0;
};

// One flat FL iteration: all MUs upload to the MBS over all M carriers, then
// the MBS broadcasts on all M carriers.
FlLatency fl_iteration_latency(const topology::NetworkLayout& layout,
                               const channel::RadioParams& radio, std::uint64_t ul_bits,
                               std::uint64_t dl_bits, const LatencyConfig& cfg,
                               std::uint64_t seed);

struct HflLatency {
  std::vector<allocation::AllocationResult> allocations;  // per cluster
  std::size_t n_colors = 1;
  std::size_t cluster_subcarriers = 0;
  double fronthaul_ul_rate = 0.0;  // U^SBS, bits/s
  double fronthaul_dl_rate = 0.0;  // R^SBS, bits/s
  LatencyBreakdown breakdown;
};

// One HFL period of `period` iterations. Each cluster gets M / N_c carriers,
// N_c taken from the layout coloring unless `n_colors_override` is set.
// Fronthaul rates are fronthaul_multiplier times the layout-mean MU -> SBS
// expected uplink rate and SBS -> MU expected broadcast throughput.
HflLatency hfl_period_latency(const topology::NetworkLayout& layout,
                              const channel::RadioParams& radio, std::size_t period,
                              const HopPayloads& payloads, const LatencyConfig& cfg,
                              std::uint64_t seed,
                              std::optional<std::size_t> n_colors_override = std::nullopt);

}  // namespace hfl::latency

#endif  // HFL_LATENCY_HPP_
