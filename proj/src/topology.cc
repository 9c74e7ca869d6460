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

#include "hfl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

#include "hfl/rng.hpp"

namespace hfl::topology {
namespace {

constexpr std::size_t kMaxClusters = 7;

GeoPoint sample_disk(Rng& rng, double radius) {
  const double r = radius * std::sqrt(rng.uniform());
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  return {r * std::cos(theta), r * std::sin(theta)};
}

std::size_t nearest(const std::vector<GeoPoint>& sites, GeoPoint p) {
  std::size_t best = 0;
  double best_d = distance(sites[0], p);
  for (std::size_t i = 1; i < sites.size(); ++i) {
    const double d = distance(sites[i], p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Balanced assignment of minimum total MU to SBS distance: every cluster
// gets exactly `target` MUs. Hungarian method over MU x (cluster, slot).
void rebalance(NetworkLayout& layout, std::size_t target) {
  const std::size_t n = layout.n_mus();
  const double inf = std::numeric_limits<double>::infinity();
  auto cost = [&](std::size_t mu, std::size_t slot) {
    return distance(layout.mu_positions[mu], layout.sbs_positions[slot / target]);
  };

  // 1-based potentials u (rows = MUs), v (columns = slots); p[j] = row of column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) layout.cluster_of_mu[p[j] - 1] = (j - 1) / target;
}

}  // namespace

double distance(GeoPoint a, GeoPoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

void LayoutConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("layout: " + what); };
  if (!(deployment_radius > 0.0) || !std::isfinite(deployment_radius))
    fail("deployment_radius must be > 0");
  if (!(hex_inscribed_diameter > 0.0) || !std::isfinite(hex_inscribed_diameter))
    fail("hex_inscribed_diameter must be > 0");
  if (!(reuse_distance >= 0.0) || !std::isfinite(reuse_distance))
    fail("reuse_distance must be >= 0");
  if (n_clusters < 1) fail("n_clusters must be >= 1");
  if (n_clusters > kMaxClusters)
    fail("n_clusters must be <= 7 (center cell plus one ring)");
  if (mus_per_cluster < 1) fail("mus_per_cluster must be >= 1");
  if (deployment_radius <= kMinLinkDistance)
    fail("deployment_radius must exceed the 1 m minimum link distance");
  if (n_clusters > 1 && hex_inscribed_diameter > deployment_radius)
    fail("ring SBSs would lie outside the deployment disk");
}

std::vector<std::size_t> NetworkLayout::members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < cluster_of_mu.size(); ++k)
    if (cluster_of_mu[k] == cluster) out.push_back(k);
  return out;
}

double NetworkLayout::mu_to_sbs(std::size_t mu) const {
  return distance(mu_positions[mu], sbs_positions[cluster_of_mu[mu]]);
}

double NetworkLayout::mu_to_mbs(std::size_t mu) const {
  return distance(mu_positions[mu], mbs);
}

NetworkLayout build_layout(const LayoutConfig& config) {
  config.validate();

  NetworkLayout layout;
  layout.mbs = {0.0, 0.0};
  layout.sbs_positions.push_back({0.0, 0.0});
  // Adjacent hexagon centers are one inscribed diameter apart.
  for (std::size_t i = 1; i < config.n_clusters; ++i) {
    const double theta = std::numbers::pi / 6.0 + std::numbers::pi / 3.0 * static_cast<double>(i - 1);
    layout.sbs_positions.push_back({config.hex_inscribed_diameter * std::cos(theta),
                                    config.hex_inscribed_diameter * std::sin(theta)});
  }

  Rng rng(derive_seed(config.seed, {0x6c61796f7574ULL}));
  const std::size_t total = config.n_clusters * config.mus_per_cluster;
  layout.mu_positions.reserve(total);
  while (layout.mu_positions.size() < total) {
    const GeoPoint p = sample_disk(rng, config.deployment_radius);
    const std::size_t c = nearest(layout.sbs_positions, p);
    if (distance(layout.sbs_positions[c], p) < kMinLinkDistance) continue;
    layout.mu_positions.push_back(p);
    layout.cluster_of_mu.push_back(c);
  }
  rebalance(layout, config.mus_per_cluster);
  // Rebalanced MUs may now sit next to a different SBS; the 1 m floor holds
  // for every SBS because it was enforced against the nearest one.
  return color_clusters(std::move(layout), config.reuse_distance);
}

NetworkLayout color_clusters(NetworkLayout layout, double d_th) {
  const std::size_t n = layout.n_clusters();
  std::vector<std::vector<bool>> conflict(n, std::vector<bool>(n, false));
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      // Lattice neighbors sit at d_th up to rounding; they do not conflict.
      if (distance(layout.sbs_positions[a], layout.sbs_positions[b]) < d_th * (1.0 - 1e-9)) {
        conflict[a][b] = conflict[b][a] = true;
        ++degree[a];
        ++degree[b];
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return degree[a] > degree[b]; });

  constexpr std::size_t kUncolored = static_cast<std::size_t>(-1);
  layout.color_of_cluster.assign(n, kUncolored);
  for (std::size_t v : order) {
    std::set<std::size_t> used;
    for (std::size_t u = 0; u < n; ++u)
      if (conflict[v][u] && layout.color_of_cluster[u] != kUncolored)
        used.insert(layout.color_of_cluster[u]);
    std::size_t color = 0;
    while (used.contains(color)) ++color;
    layout.color_of_cluster[v] = color;
  }
  std::set<std::size_t> distinct(layout.color_of_cluster.begin(), layout.color_of_cluster.end());
  layout.n_colors = distinct.size();
  return layout;
}

nlohmann::json to_json(const NetworkLayout& layout) {
  auto points = [](const std::vector<GeoPoint>& ps) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : ps) arr.push_back({p.x, p.y});
    return arr;
  };
  return {
      {"mbs", {layout.mbs.x, layout.mbs.y}},
      {"sbs_positions", points(layout.sbs_positions)},
      {"mu_positions", points(layout.mu_positions)},
      {"cluster_of_mu", layout.cluster_of_mu},
      {"color_of_cluster", layout.color_of_cluster},
      {"n_colors", layout.n_colors},
  };
}

NetworkLayout layout_from_json(const nlohmann::json& j) {
  auto point = [](const nlohmann::json& p) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("layout: point must be [x, y]");
    GeoPoint g{p[0].get<double>(), p[1].get<double>()};
    if (!std::isfinite(g.x) || !std::isfinite(g.y))
      throw std::invalid_argument("layout: non-finite coordinate");
    return g;
  };
  NetworkLayout layout;
  try {
    layout.mbs = point(j.at("mbs"));
    for (const auto& p : j.at("sbs_positions")) layout.sbs_positions.push_back(point(p));
    for (const auto& p : j.at("mu_positions")) layout.mu_positions.push_back(point(p));
    layout.cluster_of_mu = j.at("cluster_of_mu").get<std::vector<std::size_t>>();
    layout.color_of_cluster = j.at("color_of_cluster").get<std::vector<std::size_t>>();
    layout.n_colors = j.at("n_colors").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("layout: ") + e.what());
  }
  const std::size_t n = layout.n_clusters();
  if (n == 0) throw std::invalid_argument("layout: no SBS positions");
  if (layout.cluster_of_mu.size() != layout.n_mus())
    throw std::invalid_argument("layout: cluster_of_mu length mismatch");
  if (layout.color_of_cluster.size() != n)
    throw std::invalid_argument("layout: color_of_cluster length mismatch");
  std::vector<std::size_t> count(n, 0);
  for (std::size_t c : layout.cluster_of_mu) {
    if (c >= n) throw std::invalid_argument("layout: cluster index out of range");
    ++count[c];
  }
  if (std::adjacent_find(count.begin(), count.end(), std::not_equal_to<>()) != count.end())
    throw std::invalid_argument("layout: clusters must have equal MU counts");
  std::set<std::size_t> distinct(layout.color_of_cluster.begin(), layout.color_of_cluster.end());
  if (distinct.size() != layout.n_colors)
    throw std::invalid_argument("layout: n_colors disagrees with color_of_cluster");
  return layout;
}

}  // namespace hfl::topology
