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

#include "hfl/latency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hfl/rng.hpp"

namespace hfl::latency {
namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kTagFlDownlink = 0x464c444cULL;
constexpr std::uint64_t kTagClusterDownlink = 0x43444cULL;
constexpr std::uint64_t kTagModelDownlink = 0x4d444cULL;

double max_of(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, x);
  return m;
}

}  // namespace

void PayloadSpec::validate() const {
  if (q_params < 1) throw std::invalid_argument("payload: q_params must be >= 1");
  if (q_bits < 1) throw std::invalid_argument("payload: q_bits must be >= 1");
  if (!(sparsity >= 0.0 && sparsity < 1.0))
    throw std::invalid_argument("payload: sparsity must lie in [0, 1)");
}

PayloadSpec PayloadSpec::with_sparsity(std::uint64_t q_params, std::uint32_t q_bits, double phi) {
  return PayloadSpec{q_params, q_bits, phi, default_index_bits(q_params)};
}

std::uint32_t default_index_bits(std::uint64_t q_params) {
  std::uint32_t bits = 0;
  while (bits < 64 && (std::uint64_t{1} << bits) < q_params) ++bits;
  return bits;
}

std::uint64_t payload_bits(const PayloadSpec& spec) {
  spec.validate();
  if (spec.sparsity == 0.0) return spec.q_params * spec.q_bits;
  const std::uint64_t kept = sparsify::kept_count(spec.q_params, spec.sparsity);
  return kept * (std::uint64_t{spec.q_bits} + spec.index_bits);
}

HopPayloads HopPayloads::dense(std::uint64_t q_params, std::uint32_t q_bits) {
  const std::uint64_t bits = payload_bits({q_params, q_bits, 0.0, 0});
  return {bits, bits, bits, bits};
}

HopPayloads HopPayloads::sparse(std::uint64_t q_params, std::uint32_t q_bits,
                                const sparsify::SparsifierConfig& phis) {
  auto bits = [&](double phi) {
    return payload_bits(PayloadSpec::with_sparsity(q_params, q_bits, phi));
  };
  return {bits(phis.phi_ul_mu), bits(phis.phi_dl_sbs), bits(phis.phi_ul_sbs), bits(phis.phi_dl_mbs)};
}

void LatencyConfig::validate() const {
  if (!(slot_duration > 0.0)) throw std::invalid_argument("latency: slot_duration must be > 0");
  if (!(fronthaul_multiplier > 0.0))
    throw std::invalid_argument("latency: fronthaul_multiplier must be > 0");
  if (mc_replicas < 1) throw std::invalid_argument("latency: mc_replicas must be >= 1");
  if (max_slots < 1) throw std::invalid_argument("latency: max_slots must be >= 1");
}

double ul_latency(double rate, double payload) {
  if (payload <= 0.0) return 0.0;
  if (!(rate > 0.0)) return kInfiniteLatency;
  return payload / rate;
}

double broadcast_latency(double payload, std::span<const channel::LinkBudget> users,
                         std::size_t total_subcarriers, const LatencyConfig& cfg,
                         std::uint64_t seed, channel::FadingKind fading) {
  cfg.validate();
  if (users.empty()) throw std::invalid_argument("broadcast_latency: no users");
  if (total_subcarriers < 1) throw std::invalid_argument("broadcast_latency: no sub-carriers");
  if (payload <= 0.0) return 0.0;

  std::vector<double> mean_snr(users.size());
  for (std::size_t k = 0; k < users.size(); ++k)
    mean_snr[k] = channel::broadcast_snr(1.0, users[k], total_subcarriers);

  const bool collapsed = cfg.sampling == BroadcastSampling::kCollapsedMinimum &&
                         fading == channel::FadingKind::kExponentialUnitMean;
  double inv_sum = 0.0;
  for (double a : mean_snr) inv_sum += 1.0 / a;
  const double worst_mean_snr = 1.0 / inv_sum;
  const double b0 = users.front().b0;
  if (collapsed) {
    for (const auto& u : users)
      if (u.b0 != b0)
        throw std::invalid_argument("broadcast_latency: users must share the sub-carrier spacing");
  }

  const channel::FadingModel model{fading, seed};
  std::vector<double> gains(users.size());
  double total = 0.0;
  for (std::size_t r = 0; r < cfg.mc_replicas; ++r) {
    Rng rng(derive_seed(seed, {r}));
    double delivered = 0.0;
    std::uint64_t slots = 0;
    while (delivered < payload && slots < cfg.max_slots) {
      double slot_rate = 0.0;
      for (std::size_t m = 0; m < total_subcarriers; ++m) {
        if (collapsed) {
          slot_rate += b0 * std::log2(1.0 + worst_mean_snr * rng.exponential());
        } else {
          for (double& g : gains) g = model.draw(rng);
          slot_rate += channel::broadcast_rate_per_subcarrier(gains, users, total_subcarriers);
        }
      }
      if (slot_rate <= 0.0 && fading == channel::FadingKind::kConstantUnit) return kInfiniteLatency;
      delivered += cfg.slot_duration * slot_rate;
      ++slots;
    }
    if (delivered < payload) return kInfiniteLatency;
    total += static_cast<double>(slots) * cfg.slot_duration;
  }
  return total / static_cast<double>(cfg.mc_replicas);
}

double broadcast_throughput(std::span<const channel::LinkBudget> users,
                            std::size_t total_subcarriers, channel::FadingKind fading) {
  if (users.empty()) throw std::invalid_argument("broadcast_throughput: no users");
  const double m = static_cast<double>(total_subcarriers);
  if (fading == channel::FadingKind::kConstantUnit) {
    const std::vector<double> ones(users.size(), 1.0);
    return m * channel::broadcast_rate_per_subcarrier(ones, users, total_subcarriers);
  }
  double inv_sum = 0.0;
  for (const auto& u : users) inv_sum += 1.0 / channel::broadcast_snr(1.0, u, total_subcarriers);
  return m * users.front().b0 * channel::expected_log2_one_plus_exp(1.0 / inv_sum);
}

std::vector<channel::LinkBudget> cluster_uplink_budgets(const topology::NetworkLayout& layout,
                                                        std::size_t cluster,
                                                        const channel::RadioParams& radio) {
  std::vector<channel::LinkBudget> out;
  for (std::size_t k : layout.members(cluster)) out.push_back(radio.budget(radio.p_mu, layout.mu_to_sbs(k)));
  return out;
}

std::vector<channel::LinkBudget> cluster_downlink_budgets(const topology::NetworkLayout& layout,
                                                          std::size_t cluster,
                                                          const channel::RadioParams& radio) {
  std::vector<channel::LinkBudget> out;
  for (std::size_t k : layout.members(cluster)) out.push_back(radio.budget(radio.p_sbs, layout.mu_to_sbs(k)));
  return out;
}

ClusterRound cluster_round_latency(const topology::NetworkLayout& layout, std::size_t cluster,
                                   const channel::RadioParams& radio,
                                   const allocation::AllocationResult& alloc, double ul_bits,
                                   double dl_bits, std::size_t cluster_subcarriers,
                                   const LatencyConfig& cfg, std::uint64_t seed) {
  const auto downlink = cluster_downlink_budgets(layout, cluster, radio);
  if (alloc.rates.size() != downlink.size())
    throw std::invalid_argument("cluster_round_latency: allocation does not match cluster size");
  ClusterRound round;
  for (double rate : alloc.rates) round.gamma_u = std::max(round.gamma_u, ul_latency(rate, ul_bits));
  round.gamma_d = broadcast_latency(dl_bits, downlink, cluster_subcarriers, cfg, seed);
  return round;
}

LatencyBreakdown period_latency(std::span<const std::vector<ClusterRound>> rounds,
                                double theta_u, double theta_d,
                                std::span<const double> final_dl, std::size_t period) {
  if (period < 1) throw std::invalid_argument("period_latency: period must be >= 1");
  if (rounds.empty() || rounds.size() != final_dl.size())
    throw std::invalid_argument("period_latency: need one round list and final latency per cluster");
  LatencyBreakdown b;
  b.period = period;
  double slowest_cluster = 0.0;
  for (const auto& cluster_rounds : rounds) {
    if (cluster_rounds.size() != period)
      throw std::invalid_argument("period_latency: each cluster needs `period` rounds");
    double sum_u = 0.0;
    double sum_d = 0.0;
    for (const auto& r : cluster_rounds) {
      sum_u += r.gamma_u;
      sum_d += r.gamma_d;
    }
    slowest_cluster = std::max(slowest_cluster, sum_u + sum_d);
    b.gamma_u_per_cluster.push_back(sum_u / static_cast<double>(period));
    b.gamma_d_per_cluster.push_back(sum_d / static_cast<double>(period));
  }
  b.theta_u = theta_u;
  b.theta_d = theta_d;
  b.t_dl = max_of(final_dl);
  b.gamma_period = slowest_cluster + theta_u + theta_d + b.t_dl;
  b.gamma_per_iter = b.gamma_period / static_cast<double>(period);
  return b;
}

nlohmann::json to_json(const LatencyBreakdown& b) {
  return {
      {"period", b.period},
      {"t_ul_per_mu", b.t_ul_per_mu},
      {"t_ul", b.t_ul},
      {"t_dl", b.t_dl},
      {"gamma_u_per_cluster", b.gamma_u_per_cluster},
      {"gamma_d_per_cluster", b.gamma_d_per_cluster},
      {"theta_u", b.theta_u},
      {"theta_d", b.theta_d},
      {"gamma_period", b.gamma_period},
      {"gamma_per_iter", b.gamma_per_iter},
  };
}

FlLatency fl_iteration_latency(const topology::NetworkLayout& layout,
                               const channel::RadioParams& radio, std::uint64_t ul_bits,
                               std::uint64_t dl_bits, const LatencyConfig& cfg,
                               std::uint64_t seed) {
  radio.validate();
  std::vector<channel::LinkBudget> uplink;
  std::vector<channel::LinkBudget> downlink;
  for (std::size_t k = 0; k < layout.n_mus(); ++k) {
    uplink.push_back(radio.budget(radio.p_mu, layout.mu_to_mbs(k)));
    downlink.push_back(radio.budget(radio.p_mbs, layout.mu_to_mbs(k)));
  }
  FlLatency out;
  out.allocation = allocation::allocate_maxmin(uplink, radio.n_subcarriers);
  for (double rate : out.allocation.rates)
    out.t_ul_per_mu.push_back(ul_latency(rate, static_cast<double>(ul_bits)));
  out.t_ul = max_of(out.t_ul_per_mu);
  out.t_dl = broadcast_latency(static_cast<double>(dl_bits), downlink, radio.n_subcarriers, cfg,
                               derive_seed(seed, {kTagFlDownlink}));
  out.total = out.t_ul + out.t_dl;
  return out;
}

HflLatency hfl_period_latency(const topology::NetworkLayout& layout,
                              const channel::RadioParams& radio, std::size_t period,
                              const HopPayloads& payloads, const LatencyConfig& cfg,
                              std::uint64_t seed, std::optional<std::size_t> n_colors_override) {
  radio.validate();
  cfg.validate();
  if (period < 1) throw std::invalid_argument("hfl_period_latency: period must be >= 1");
  HflLatency out;
  out.n_colors = n_colors_override.value_or(layout.n_colors);
  if (out.n_colors < 1) throw std::invalid_argument("hfl_period_latency: n_colors must be >= 1");
  out.cluster_subcarriers = radio.n_subcarriers / out.n_colors;

  const std::size_t n_clusters = layout.n_clusters();
  std::vector<std::vector<ClusterRound>> rounds(n_clusters);
  std::vector<double> final_dl(n_clusters);
  std::vector<double> t_ul_per_mu(layout.n_mus(), 0.0);
  double ul_rate_sum = 0.0;
  double dl_rate_sum = 0.0;
  for (std::size_t n = 0; n < n_clusters; ++n) {
    const auto members = layout.members(n);
    if (members.empty()) throw std::invalid_argument("hfl_period_latency: empty cluster");
    if (out.cluster_subcarriers < members.size())
      throw std::invalid_argument("hfl_period_latency: fewer carriers per cluster than members");
    const auto uplink = cluster_uplink_budgets(layout, n, radio);
    const auto downlink = cluster_downlink_budgets(layout, n, radio);
    out.allocations.push_back(allocation::allocate_maxmin(uplink, out.cluster_subcarriers));
    const auto& alloc = out.allocations.back();
    for (std::size_t j = 0; j < members.size(); ++j) {
      t_ul_per_mu[members[j]] = ul_latency(alloc.rates[j], static_cast<double>(payloads.ul_mu));
      ul_rate_sum += alloc.rates[j];
    }
    for (std::size_t i = 0; i < period; ++i) {
      rounds[n].push_back(cluster_round_latency(layout, n, radio, alloc,
                                                static_cast<double>(payloads.ul_mu),
                                                static_cast<double>(payloads.dl_sbs),
                                                out.cluster_subcarriers, cfg,
                                                derive_seed(seed, {kTagClusterDownlink, n, i})));
    }
    final_dl[n] = broadcast_latency(static_cast<double>(payloads.dl_sbs), downlink,
                                    out.cluster_subcarriers, cfg,
                                    derive_seed(seed, {kTagModelDownlink, n}));
    dl_rate_sum += broadcast_throughput(downlink, out.cluster_subcarriers);
  }
  out.fronthaul_ul_rate =
      cfg.fronthaul_multiplier * ul_rate_sum / static_cast<double>(layout.n_mus());
  out.fronthaul_dl_rate =
      cfg.fronthaul_multiplier * dl_rate_sum / static_cast<double>(n_clusters);
  const double theta_u = ul_latency(out.fronthaul_ul_rate, static_cast<double>(payloads.ul_sbs));
  const double theta_d = ul_latency(out.fronthaul_dl_rate, static_cast<double>(payloads.dl_mbs));

  out.breakdown = period_latency(rounds, theta_u, theta_d, final_dl, period);
  out.breakdown.t_ul_per_mu = std::move(t_ul_per_mu);
  out.breakdown.t_ul = max_of(out.breakdown.t_ul_per_mu);
  return out;
}

}  // namespace hfl::latency
