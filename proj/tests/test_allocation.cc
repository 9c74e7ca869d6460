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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "hfl/allocation.hpp"
#include "hfl/rng.hpp"
#include "oracles.hpp"

namespace al = hfl::allocation;
namespace ch = hfl::channel;

namespace {

ch::LinkBudget at(double d) {
  ch::LinkBudget b;
  b.distance = d;
  return b;
}

}  // namespace

TEST_CASE("forced allocation") {
  const std::vector<ch::LinkBudget> users = {at(100), at(300), at(500)};
  const auto r = al::allocate_maxmin(users, 3);
  CHECK(r.counts == std::vector<std::size_t>{1, 1, 1});
  CHECK(al::brute_force_allocate(std::span(users).first(2), 2).counts == std::vector<std::size_t>{1, 1});
}

TEST_CASE("identical users split evenly") {
  const std::vector<ch::LinkBudget> users = {at(200), at(200)};
  CHECK(al::allocate_maxmin(users, 4).counts == std::vector<std::size_t>{2, 2});
  CHECK(oracle::maxmin_enumerate(users, 4).first == std::vector<std::size_t>{2, 2});
}

TEST_CASE("far user gets more carriers") {
  ch::LinkBudget near = at(100), far = at(400);
  near.alpha = far.alpha = 2.8;
  const std::vector<ch::LinkBudget> users = {near, far};
  const auto greedy = al::allocate_maxmin(users, 6);
  const auto [want, rate] = oracle::maxmin_enumerate(users, 6);
  CHECK(greedy.counts == want);
  // Frozen from the enumeration above. At these SNRs the rate is close to
  // linear in the carrier count, so the far user gains no extra carrier.
  CHECK(greedy.counts == std::vector<std::size_t>{3, 3});
  CHECK(greedy.counts[1] >= greedy.counts[0]);
  CHECK(al::allocate_maxmin(users, 7).counts == oracle::maxmin_enumerate(users, 7).first);
  CHECK(al::allocate_maxmin(users, 7).counts[1] == 4);
  CHECK(greedy.min_rate == doctest::Approx(rate).epsilon(1e-12));
}

TEST_CASE("single user takes everything") {
  const std::vector<ch::LinkBudget> users = {at(321)};
  const auto r = al::brute_force_allocate(users, 7);
  CHECK(r.counts == std::vector<std::size_t>{7});
  CHECK(al::allocate_maxmin(users, 7).counts == std::vector<std::size_t>{7});
}

TEST_CASE("result invariants") {
  hfl::Rng rng(hfl::derive_seed(9, {1}));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ch::LinkBudget> users;
    const std::size_t k = 1 + rng.below(6);
    for (std::size_t i = 0; i < k; ++i) users.push_back(oracle::random_budget(rng));
    const std::size_t m = k + rng.below(40);
    const auto r = al::allocate_maxmin(users, m);
    std::size_t total = 0;
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(r.counts[i] >= 1);
      total += r.counts[i];
      CHECK(r.rates[i] == ch::expected_ul_rate(r.counts[i], users[i]));
    }
    CHECK(total == m);
    CHECK(r.min_rate == *std::min_element(r.rates.begin(), r.rates.end()));
    const auto again = al::allocate_maxmin(users, m);
    CHECK(again.counts == r.counts);
    CHECK(al::allocate_maxmin(users, m + 1).min_rate >= r.min_rate);
    const auto blocks = r.carrier_blocks(10);
    CHECK(blocks.front().first == 10);
    CHECK(blocks.back().second == 10 + m);
    for (std::size_t i = 1; i < k; ++i) CHECK(blocks[i].first == blocks[i - 1].second);
  }
}

TEST_CASE("greedy equals brute force on 100 random instances") {
  hfl::Rng rng(hfl::derive_seed(10, {2}));
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ch::LinkBudget> users;
    const std::size_t k = 1 + rng.below(4);
    for (std::size_t i = 0; i < k; ++i) users.push_back(oracle::random_budget(rng));
    const std::size_t m = k + rng.below(9 - k);
    CAPTURE(trial);
    const auto greedy = al::allocate_maxmin(users, m);
    const auto brute = al::brute_force_allocate(users, m);
    const auto [counts, rate] = oracle::maxmin_enumerate(users, m);
    CHECK(brute.counts == counts);
    CHECK(std::abs(greedy.min_rate - brute.min_rate) <= 1e-9 * brute.min_rate);
  }
}

TEST_CASE("errors") {
  const std::vector<ch::LinkBudget> users = {at(100), at(200)};
  CHECK_THROWS_AS(al::allocate_maxmin(users, 1), std::invalid_argument);
  CHECK_THROWS_AS(al::allocate_maxmin({}, 4), std::invalid_argument);
  const std::vector<ch::LinkBudget> six(6, at(100));
  CHECK_THROWS_AS(al::brute_force_allocate(six, 8), std::invalid_argument);
  CHECK_THROWS_AS(al::brute_force_allocate(users, 13), std::invalid_argument);
}

TEST_CASE("json") {
  const std::vector<ch::LinkBudget> users = {at(100), at(400)};
  const auto j = al::to_json(al::allocate_maxmin(users, 6));
  REQUIRE(j.at("users").size() == 2);
  CHECK(j.at("users")[0].at("count") == 3);
  CHECK(j.at("users")[1].at("count") == 3);
  CHECK(j.at("users")[1].at("first_carrier") == 3);
  CHECK(j.contains("min_rate_bps"));
}
