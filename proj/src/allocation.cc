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

#include "hfl/allocation.hpp"

#include <algorithm>
#include <stdexcept>

namespace hfl::allocation {
namespace {

void check_inputs(std::span<const channel::LinkBudget> budgets, std::size_t m_available) {
  if (budgets.empty()) throw std::invalid_argument("allocation: no users");
  if (m_available < budgets.size())
    throw std::invalid_argument("allocation: infeasible, fewer carriers than users");
  for (const auto& b : budgets) b.validate();
}

AllocationResult finish(std::span<const channel::LinkBudget> budgets,
                        std::vector<std::size_t> counts) {
  AllocationResult r;
  r.counts = std::move(counts);
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    r.thresholds.push_back(channel::optimize_threshold(r.counts[k], budgets[k]));
    r.rates.push_back(static_cast<double>(r.counts[k]) * r.thresholds.back().expected_rate);
  }
  r.min_rate = *std::min_element(r.rates.begin(), r.rates.end());
  return r;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> AllocationResult::carrier_blocks(
    std::size_t first_carrier) const {
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
  std::size_t next = first_carrier;
  for (std::size_t c : counts) {
    blocks.emplace_back(next, next + c);
    next += c;
  }
  return blocks;
}

AllocationResult allocate_maxmin(std::span<const channel::LinkBudget> budgets,
                                 std::size_t m_available) {
  check_inputs(budgets, m_available);
  const std::size_t k_users = budgets.size();
  std::vector<std::size_t> counts(k_users, 1);
  std::vector<double> rates(k_users);
  for (std::size_t k = 0; k < k_users; ++k) rates[k] = channel::expected_ul_rate(1, budgets[k]);

  for (std::size_t used = k_users; used < m_available; ++used) {
    // min_element returns the first minimum, i.e. the lowest index on ties.
    const auto k = static_cast<std::size_t>(
        std::min_element(rates.begin(), rates.end()) - rates.begin());
    ++counts[k];
    rates[k] = channel::expected_ul_rate(counts[k], budgets[k]);
  }
  return finish(budgets, std::move(counts));
}

AllocationResult brute_force_allocate(std::span<const channel::LinkBudget> budgets,
                                      std::size_t m_available) {
  check_inputs(budgets, m_available);
  const std::size_t k_users = budgets.size();
  if (k_users > kBruteForceMaxUsers || m_available > kBruteForceMaxCarriers)
    throw std::invalid_argument("brute_force_allocate: instance exceeds the size guard");

  // rate_table[k][n] = expected rate of MU k holding n carriers.
  const std::size_t max_n = m_available - k_users + 1;
  std::vector<std::vector<double>> rate_table(k_users, std::vector<double>(max_n + 1, 0.0));
  for (std::size_t k = 0; k < k_users; ++k)
    for (std::size_t n = 1; n <= max_n; ++n)
      rate_table[k][n] = channel::expected_ul_rate(n, budgets[k]);

  std::vector<std::size_t> counts(k_users, 1);
  std::vector<std::size_t> best;
  double best_min = -1.0;
  // Enumerate compositions in lexicographic order; strict improvement keeps
  // the lexicographically smallest optimum.
  auto visit = [&](auto&& self, std::size_t k, std::size_t remaining) -> void {
    if (k + 1 == k_users) {
      counts[k] = remaining;
      double m = rate_table[0][counts[0]];
      for (std::size_t i = 1; i < k_users; ++i) m = std::min(m, rate_table[i][counts[i]]);
      if (m > best_min) {
        best_min = m;
        best = counts;
      }
      return;
    }
    const std::size_t users_after = k_users - k - 1;
    for (std::size_t n = 1; n + users_after <= remaining; ++n) {
      counts[k] = n;
      self(self, k + 1, remaining - n);
    }
  };
  visit(visit, 0, m_available);
  return finish(budgets, std::move(best));
}

nlohmann::json to_json(const AllocationResult& result) {
  nlohmann::json users = nlohmann::json::array();
  const auto blocks = result.carrier_blocks();
  for (std::size_t k = 0; k < result.counts.size(); ++k) {
    users.push_back({
        {"count", result.counts[k]},
        {"first_carrier", blocks[k].first},
        {"rate_bps", result.rates[k]},
        {"gamma_th", result.thresholds[k].gamma_th},
        {"rho", result.thresholds[k].rho},
        {"per_carrier_rate_bps", result.thresholds[k].expected_rate},
    });
  }
  return {{"users", users}, {"min_rate_bps", result.min_rate}};
}

}  // namespace hfl::allocation
