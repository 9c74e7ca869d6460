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

// Max-min sub-carrier allocation over expected uplink rates. Gains are i.i.d.
// across carriers, so an allocation is fully described by per-MU counts.

#ifndef HFL_ALLOCATION_HPP_
#define HFL_ALLOCATION_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "hfl/channel.hpp"
#include "json.hpp"

namespace hfl::allocation {

struct AllocationResult {
  std::vector<std::size_t> counts;
  std::vector<double> rates;  // expected UL rate per MU, bits/s
  std::vector<channel::ThresholdSolution> thresholds;
  double min_rate = 0.0;

  // Labels concrete carriers: MU k gets the contiguous block starting after
  // MU k-1's block, offset by `first_carrier`. Returns [first, last) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> carrier_blocks(std::size_t first_carrier = 0) const;
};

// Greedy allocation: every MU starts with one carrier, then the MU with the
// lowest expected rate (lowest index on ties) receives the next one until
// `m_available` carriers are used. Throws std::invalid_argument when
// m_available < budgets.size() or budgets is empty.
AllocationResult allocate_maxmin(std::span<const channel::LinkBudget> budgets,
                                 std::size_t m_available);

inline constexpr std::size_t kBruteForceMaxUsers = 5;
inline constexpr std::size_t kBruteForceMaxCarriers = 12;

// Exhaustive search over count vectors (each >= 1, summing to m_available).
// Ties resolve to the lexicographically smallest counts. Limited to
// kBruteForceMaxUsers users and kBruteForceMaxCarriers carriers.
AllocationResult brute_force_allocate(std::span<const channel::LinkBudget> budgets,
                                      std::size_t m_available);

nlohmann::json to_json(const AllocationResult& result);

}  // namespace hfl::allocation

#endif  // HFL_ALLOCATION_HPP_
