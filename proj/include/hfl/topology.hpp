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

// Heterogeneous cellular network geometry: one macro base station (MBS) at
// the origin, hexagonal small-cell clusters with a small base station (SBS)
// at each hexagon center, and mobile users (MUs) placed uniformly in the
// deployment disk.

#ifndef HFL_TOPOLOGY_HPP_
#define HFL_TOPOLOGY_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

namespace hfl::topology {

struct GeoPoint {
  double x = 0.0;  // meters
  double y = 0.0;  // meters

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

double distance(GeoPoint a, GeoPoint b);

struct LayoutConfig {
  double deployment_radius = 750.0;
  double hex_inscribed_diameter = 500.0;
  std::size_t n_clusters = 7;
  std::size_t mus_per_cluster = 4;
  // Clusters closer than this (center to center) may not share a color.
  double reuse_distance = 500.0;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

// Smallest MU to SBS distance accepted at sampling time.
inline constexpr double kMinLinkDistance = 1.0;

struct NetworkLayout {
  GeoPoint mbs;
  std::vector<GeoPoint> sbs_positions;
  std::vector<GeoPoint> mu_positions;
  std::vector<std::size_t> cluster_of_mu;
  std::vector<std::size_t> color_of_cluster;
  std::size_t n_colors = 0;

  std::size_t n_clusters() const { return sbs_positions.size(); }
  std::size_t n_mus() const { return mu_positions.size(); }
  // MU indices of `cluster`, ascending.
  std::vector<std::size_t> members(std::size_t cluster) const;
  double mu_to_sbs(std::size_t mu) const;
  double mu_to_mbs(std::size_t mu) const;
};

// Builds the center-plus-ring hexagonal layout, samples and balances MUs,
// then colors the clusters with `config.reuse_distance`. Pure in `config`.
NetworkLayout build_layout(const LayoutConfig& config);

// Greedy coloring of the conflict graph (edge iff center distance < d_th),
// visiting clusters by descending degree, ties by lower index. Distances
// within 1e-9 relative below d_th count as d_th.
NetworkLayout color_clusters(NetworkLayout layout, double d_th);

nlohmann::json to_json(const NetworkLayout& layout);
// Accepts the output of to_json. Throws std::invalid_argument on malformed or
// inconsistent input.
NetworkLayout layout_from_json(const nlohmann::json& j);

}  // namespace hfl::topology

#endif  // HFL_TOPOLOGY_HPP_
