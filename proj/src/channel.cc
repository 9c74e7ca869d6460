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

#include "hfl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hfl::channel {
namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// Power series, accurate for small arguments.
double e1_series(double x) {
  double sum = 0.0;
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -x / k;
    const double add = term / k;
    sum += add;
    if (std::abs(add) < 1e-17 * std::abs(sum)) break;
  }
  return -kEulerGamma - std::log(x) - sum;
}

// Continued fraction via modified Lentz, for x > 1. Returns exp(x) E1(x).
double scaled_e1_continued_fraction(double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

void LinkBudget::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("link budget: " + what); };
  if (!(p_max > 0.0)) fail("p_max must be > 0");
  if (!(n0_b0 > 0.0)) fail("n0_b0 must be > 0");
  if (!(b0 > 0.0)) fail("b0 must be > 0");
  if (!(distance >= 1.0)) fail("distance must be >= 1 m");
  if (!(alpha >= 2.0 && alpha <= 6.0)) fail("alpha must lie in [2, 6]");
  if (!(ber > 0.0 && ber < 0.2)) fail("ber must lie in (0, 0.2)");
}

double LinkBudget::attenuation() const { return n0_b0 * std::pow(distance, alpha); }

double RadioParams::noise_watts() const { return std::pow(10.0, noise_dbw / 10.0); }

LinkBudget RadioParams::budget(double p_max, double distance) const {
  return LinkBudget{p_max, noise_watts(), subcarrier_spacing, distance, alpha, ber};
}

void RadioParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("radio: " + what); };
  if (n_subcarriers < 1) fail("n_subcarriers must be >= 1");
  if (!(subcarrier_spacing > 0.0)) fail("subcarrier_spacing must be > 0");
  if (!std::isfinite(noise_dbw)) fail("noise_dbw must be finite");
  if (!(p_mbs > 0.0) || !(p_sbs > 0.0) || !(p_mu > 0.0)) fail("powers must be > 0");
  if (!(alpha >= 2.0 && alpha <= 6.0)) fail("alpha must lie in [2, 6]");
  if (!(ber > 0.0 && ber < 0.2)) fail("ber must lie in (0, 0.2)");
}

RadioParams RadioParams::table2() { return RadioParams{}; }

RadioParams RadioParams::text() {
  RadioParams p;
  p.n_subcarriers = 300;
  return p;
}

double normalized_gain(double gamma, const LinkBudget& budget) {
  return gamma / budget.attenuation();
}

double inverse_gain_tail(double gamma_th) {
  if (!(gamma_th > 0.0))
    throw std::domain_error("inverse_gain_tail: threshold must be > 0");
  if (std::isinf(gamma_th)) return 0.0;
  return gamma_th <= 1.0 ? e1_series(gamma_th)
                         : scaled_e1_continued_fraction(gamma_th) * std::exp(-gamma_th);
}

double scaled_inverse_gain_tail(double x) {
  if (!(x > 0.0)) throw std::domain_error("scaled_inverse_gain_tail: argument must be > 0");
  if (std::isinf(x)) return 0.0;
  return x <= 1.0 ? std::exp(x) * e1_series(x) : scaled_e1_continued_fraction(x);
}

double expected_log2_one_plus_exp(double mean_snr) {
  if (!(mean_snr > 0.0)) return 0.0;
  // E[ln(1 + aX)] = exp(1/a) E1(1/a)
  return scaled_inverse_gain_tail(1.0 / mean_snr) / std::numbers::ln2;
}

double rho(double gamma_th, std::size_t n_assigned, const LinkBudget& budget) {
  if (n_assigned < 1) throw std::invalid_argument("rho: n_assigned must be >= 1");
  return budget.p_max /
         (static_cast<double>(n_assigned) * budget.attenuation() * inverse_gain_tail(gamma_th));
}

double allocated_power(double gamma, double gamma_th, double rho, const LinkBudget& budget) {
  if (gamma < gamma_th) return 0.0;
  return rho / normalized_gain(gamma, budget);
}

double qam_snr_gap(double ber) { return -std::log(5.0 * ber) / 1.5; }

double expected_rate_at(double gamma_th, std::size_t n_assigned, const LinkBudget& budget) {
  const double r = rho(gamma_th, n_assigned, budget);
  return budget.b0 * std::log2(1.0 + r / qam_snr_gap(budget.ber)) * std::exp(-gamma_th);
}

ThresholdSolution optimize_threshold(std::size_t n_assigned, const LinkBudget& budget) {
  if (n_assigned < 1) throw std::invalid_argument("optimize_threshold: n_assigned must be >= 1");
  auto f = [&](double g) { return expected_rate_at(g, n_assigned, budget); };

  // Coarse log-spaced scan brackets the maximum, golden section refines it.
  constexpr int kScan = 64;
  const double log_lo = std::log(kThresholdLow);
  const double log_hi = std::log(kThresholdHigh);
  auto grid = [&](int i) {
    return i == kScan - 1 ? kThresholdHigh
                          : std::exp(log_lo + (log_hi - log_lo) * i / (kScan - 1));
  };
  int best = 0;
  double best_f = -1.0;
  for (int i = 0; i < kScan; ++i) {
    const double v = f(grid(i));
    if (v > best_f) {
      best_f = v;
      best = i;
    }
  }
  double a = grid(std::max(best - 1, 0));
  double b = grid(std::min(best + 1, kScan - 1));

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > 1e-8) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double g = 0.5 * (a + b);
  double fg = f(g);
  // The bracket endpoints can win when the optimum sits on the search bound.
  for (double edge : {a, b}) {
    const double fe = f(edge);
    if (fe > fg) {
      fg = fe;
      g = edge;
    }
  }
  return ThresholdSolution{g, rho(g, n_assigned, budget), fg};
}

double expected_ul_rate(std::size_t n_assigned, const LinkBudget& budget) {
  return static_cast<double>(n_assigned) * optimize_threshold(n_assigned, budget).expected_rate;
}

double broadcast_snr(double gamma, const LinkBudget& budget, std::size_t total_subcarriers) {
  if (total_subcarriers < 1) throw std::invalid_argument("broadcast_snr: no sub-carriers");
  return budget.p_max * gamma / (static_cast<double>(total_subcarriers) * budget.attenuation());
}

double broadcast_rate_per_subcarrier(std::span<const double> gains,
                                     std::span<const LinkBudget> budgets,
                                     std::size_t total_subcarriers) {
  if (gains.empty() || gains.size() != budgets.size())
    throw std::invalid_argument("broadcast_rate_per_subcarrier: need equal, non-empty inputs");
  double rate = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const double snr = broadcast_snr(gains[k], budgets[k], total_subcarriers);
    rate = std::min(rate, budgets[k].b0 * std::log2(1.0 + snr));
  }
  return rate;
}

}  // namespace hfl::channel
