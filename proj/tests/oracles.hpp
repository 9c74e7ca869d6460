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

// Independent reference computations used as test oracles. None of these
// call into the library code they check.

#ifndef HFL_TESTS_ORACLES_HPP_
#define HFL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "hfl/channel.hpp"
#include "hfl/dataset.hpp"
#include "hfl/model.hpp"
#include "hfl/rng.hpp"

namespace oracle {

// Composite Simpson rule in long double.
template <typename F>
long double simpson(F f, long double a, long double b, std::size_t intervals) {
  if (intervals % 2) ++intervals;
  const long double h = (b - a) / intervals;
  long double s = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i) s += (i % 2 ? 4.0L : 2.0L) * f(a + h * i);
  return s * h / 3.0L;
}

// E1(x) = int_x^inf e^-t / t dt = int_{ln x}^inf exp(-e^y) dy.
inline long double e1_quadrature(double x) {
  const long double lo = std::log(static_cast<long double>(x));
  const long double hi = std::log(80.0L);
  return simpson([](long double y) { return std::exp(-std::exp(y)); }, lo, hi, 200'000);
}

// E[log2(1 + a X)] for X ~ Exp(1), with x = e^y.
inline long double expected_log2_quadrature(double a) {
  auto f = [a](long double y) {
    const long double x = std::exp(y);
    return std::log2(1.0L + a * x) * std::exp(-x) * x;
  };
  return simpson(f, -60.0L, std::log(80.0L), 400'000);
}

inline hfl::channel::LinkBudget random_budget(hfl::Rng& rng) {
  static constexpr double kPowers[] = {0.2, 6.3, 20.0};
  hfl::channel::LinkBudget b;
  b.p_max = kPowers[rng.below(3)];
  b.distance = 50.0 + 650.0 * rng.uniform();
  b.alpha = 2.0 + 2.0 * rng.uniform();
  return b;
}

// Best expected per-carrier rate over an evenly spaced threshold grid on
// [1e-6, 50].
inline double grid_max_rate(std::size_t n_assigned, const hfl::channel::LinkBudget& b,
                            std::size_t points) {
  const double lo = 1e-6, hi = 50.0;
  double best = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double g = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    best = std::max(best, hfl::channel::expected_rate_at(g, n_assigned, b));
  }
  return best;
}

// Exhaustive max-min over count vectors, written independently of the
// library search: recursive enumeration, strict improvement only, so the
// first optimum in lexicographic order wins.
inline std::pair<std::vector<std::size_t>, double> maxmin_enumerate(
    const std::vector<hfl::channel::LinkBudget>& users, std::size_t m) {
  std::vector<std::size_t> counts(users.size(), 1), best;
  double best_rate = -1.0;
  auto rec = [&](auto&& self, std::size_t k, std::size_t left) -> void {
    if (k + 1 == users.size()) {
      counts[k] = left;
      double r = INFINITY;
      for (std::size_t i = 0; i < users.size(); ++i)
        r = std::min(r, hfl::channel::expected_ul_rate(counts[i], users[i]));
      if (r > best_rate) {
        best_rate = r;
        best = counts;
      }
      return;
    }
    const std::size_t rest = users.size() - k - 1;
    for (std::size_t c = 1; c + rest <= left; ++c) {
      counts[k] = c;
      self(self, k + 1, left - c);
    }
  };
  rec(rec, 0, m);
  return {best, best_rate};
}

// Objective recomputed from the documented parameter layout in long double.
inline long double reference_loss(const hfl::learning::ModelSpec& spec, const std::vector<long double>& w,
                                  const hfl::learning::Dataset& data, const std::vector<std::size_t>& batch,
                                  double wd) {
  const std::size_t f = spec.n_features, c = spec.n_classes, h = spec.hidden_dim;
  long double total = 0.0L;
  for (std::size_t i : batch) {
    const auto x = data.row(i);
    std::vector<long double> logits(c);
    if (spec.kind == hfl::learning::ModelKind::kSoftmaxLinear) {
      for (std::size_t k = 0; k < c; ++k) {
        long double z = w[c * f + k];
        for (std::size_t j = 0; j < f; ++j) z += w[k * f + j] * x[j];
        logits[k] = z;
      }
    } else {
      std::vector<long double> hid(h);
      for (std::size_t u = 0; u < h; ++u) {
        long double z = w[h * f + u];
        for (std::size_t j = 0; j < f; ++j) z += w[u * f + j] * x[j];
        hid[u] = z > 0 ? z : 0;
      }
      const std::size_t o = h * f + h;
      for (std::size_t k = 0; k < c; ++k) {
        long double z = w[o + c * h + k];
        for (std::size_t u = 0; u < h; ++u) z += w[o + k * h + u] * hid[u];
        logits[k] = z;
      }
    }
    long double mx = logits[0];
    for (auto z : logits) mx = std::max(mx, z);
    long double s = 0.0L;
    for (auto z : logits) s += std::exp(z - mx);
    total += mx + std::log(s) - logits[data.labels[i]];
  }
  long double reg = 0.0L;
  for (auto v : w) reg += v * v;
  return total / batch.size() + 0.5L * wd * reg;
}

// Sign pattern of every hidden pre-activation. Central differences are only
// valid when both probes share the pattern of the base point.
inline std::vector<bool> relu_pattern(const hfl::learning::ModelSpec& spec, const std::vector<long double>& w,
                                      const hfl::learning::Dataset& data, const std::vector<std::size_t>& batch) {
  std::vector<bool> out;
  if (spec.kind != hfl::learning::ModelKind::kMlp) return out;
  const std::size_t f = spec.n_features, h = spec.hidden_dim;
  for (std::size_t i : batch) {
    const auto x = data.row(i);
    for (std::size_t u = 0; u < h; ++u) {
      long double z = w[h * f + u];
      for (std::size_t j = 0; j < f; ++j) z += w[u * f + j] * x[j];
      out.push_back(z > 0);
    }
  }
  return out;
}

}  // namespace oracle

#endif  // HFL_TESTS_ORACLES_HPP_
