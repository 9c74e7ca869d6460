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

// Single-link radio model: Rayleigh fading (unit-mean exponential power
// gain), truncated channel inversion, M-QAM rate under a bit-error-rate
// target, and the worst-user broadcast rate.

#ifndef HFL_CHANNEL_HPP_
#define HFL_CHANNEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

#include "hfl/rng.hpp"

namespace hfl::channel {

struct LinkBudget {
  double p_max = 0.2;     // watts
  double n0_b0 = 1e-15;   // noise power on one sub-carrier, watts
  double b0 = 30e3;       // sub-carrier spacing, Hz
  double distance = 100;  // meters
  double alpha = 2.8;     // path-loss exponent
  double ber = 1e-3;      // target bit-error rate

  // Throws std::invalid_argument on the first violated constraint.
  void validate() const;
  // n0_b0 * distance^alpha
  double attenuation() const;
};

enum class FadingKind {
  kExponentialUnitMean,
  // Every gain is exactly 1. Only meant for deterministic checks.
  kConstantUnit,
};

struct FadingModel {
  FadingKind kind = FadingKind::kExponentialUnitMean;
  std::uint64_t seed = 0;

  double draw(Rng& rng) const {
    return kind == FadingKind::kConstantUnit ? 1.0 : rng.exponential();
  }
};

struct ThresholdSolution {
  double gamma_th = 0.0;
  double rho = 0.0;
  double expected_rate = 0.0;  // bits/s on one sub-carrier
};

// Radio parameters shared by every link of a network.
struct RadioParams {
  std::size_t n_subcarriers = 600;
  double subcarrier_spacing = 30e3;  // Hz
  double noise_dbw = -150.0;         // per sub-carrier
  double p_mbs = 20.0;               // watts
  double p_sbs = 6.3;
  double p_mu = 0.2;
  double alpha = 2.8;
  double ber = 1e-3;

  double noise_watts() const;
  LinkBudget budget(double p_max, double distance) const;
  void validate() const;

  // Reference radio with 600 sub-carriers.
  static RadioParams table2();
  // Same as table2 with 300 sub-carriers.
  static RadioParams text();
};

// gamma / (N0 B0 d^alpha)
double normalized_gain(double gamma, const LinkBudget& budget);

// Integral of f(g)/g over [gamma_th, inf) for the Exp(1) density, i.e. the
// exponential integral E1(gamma_th). Throws std::domain_error for
// gamma_th <= 0, where the integral diverges.
double inverse_gain_tail(double gamma_th);

// exp(x) * E1(x), finite for large x where the factors over/underflow.
double scaled_inverse_gain_tail(double x);

// E[log2(1 + mean_snr * X)] for X ~ Exp(1).
double expected_log2_one_plus_exp(double mean_snr);

// Inversion coefficient meeting the average power cap p_max / n_assigned.
double rho(double gamma_th, std::size_t n_assigned, const LinkBudget& budget);

// Truncated channel inversion: rho / normalized gain above the (inclusive)
// threshold, silence below it.
double allocated_power(double gamma, double gamma_th, double rho, const LinkBudget& budget);

// -ln(5 BER) / 1.5
double qam_snr_gap(double ber);

// Expected rate of one sub-carrier for a given threshold:
// B0 log2(1 + rho / gap) * P(gamma >= gamma_th).
double expected_rate_at(double gamma_th, std::size_t n_assigned, const LinkBudget& budget);

inline constexpr double kThresholdLow = 1e-6;
inline constexpr double kThresholdHigh = 50.0;

// Golden-section maximization of expected_rate_at over
// [kThresholdLow, kThresholdHigh].
ThresholdSolution optimize_threshold(std::size_t n_assigned, const LinkBudget& budget);

// n_assigned times the single-carrier optimum. n_assigned must be >= 1.
double expected_ul_rate(std::size_t n_assigned, const LinkBudget& budget);

// p_max * gamma / (M N0 B0 d^alpha) for equal power split over M carriers.
double broadcast_snr(double gamma, const LinkBudget& budget, std::size_t total_subcarriers);

// min over users of B0 log2(1 + SNR). Throws std::invalid_argument for empty
// or mismatched inputs.
double broadcast_rate_per_subcarrier(std::span<const double> gains,
                                     std::span<const LinkBudget> budgets,
                                     std::size_t total_subcarriers);

}  // namespace hfl::channel

#endif  // HFL_CHANNEL_HPP_
