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

#include "hfl/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hfl::sparsify {
namespace {

// Indices of the k largest |v|, ascending. Total order: magnitude desc, index asc.
std::vector<std::size_t> top_indices(std::span<const double> v, std::size_t k) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(v[a]);
    const double mb = std::abs(v[b]);
    return ma > mb || (ma == mb && a < b);
  };
  if (k < idx.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
    idx.resize(k);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

void check_phi(double phi) {
  if (!(phi >= 0.0 && phi < 1.0)) throw std::invalid_argument("sparsify: phi must lie in [0, 1)");
}

}  // namespace

std::vector<double> SparseVector::densify() const {
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) out[indices[i]] = values[i];
  return out;
}

void SparseVector::validate() const {
  if (indices.size() != values.size()) throw std::invalid_argument("sparse vector: length mismatch");
  if (indices.size() > dim) throw std::invalid_argument("sparse vector: more entries than dim");
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= dim) throw std::invalid_argument("sparse vector: index out of range");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw std::invalid_argument("sparse vector: indices not strictly increasing");
  }
}

nlohmann::json to_json(const SparseVector& v) {
  return {{"dim", v.dim}, {"count", v.count()}, {"indices", v.indices}, {"values", v.values}};
}

SparseVector sparse_from_json(const nlohmann::json& j) {
  SparseVector v;
  try {
    v.dim = j.at("dim").get<std::size_t>();
    v.indices = j.at("indices").get<std::vector<std::size_t>>();
    v.values = j.at("values").get<std::vector<double>>();
    if (j.at("count").get<std::size_t>() != v.indices.size())
      throw std::invalid_argument("sparse vector: count disagrees with indices");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("sparse vector: ") + e.what());
  }
  v.validate();
  return v;
}

std::size_t kept_count(std::size_t dim, double phi) {
  check_phi(phi);
  const double x = (1.0 - phi) * static_cast<double>(dim);
  const double nearest = std::round(x);
  const double k = std::abs(x - nearest) <= 1e-9 * std::max(1.0, x) ? nearest : std::ceil(x);
  return std::min(dim, static_cast<std::size_t>(k));
}

SparseVector top_fraction(std::span<const double> v, double phi) {
  SparseVector out;
  out.dim = v.size();
  out.indices = top_indices(v, kept_count(v.size(), phi));
  out.values.reserve(out.indices.size());
  for (std::size_t i : out.indices) out.values.push_back(v[i]);
  return out;
}

std::vector<bool> threshold_mask(std::span<const double> v, double phi) {
  std::vector<bool> mask(v.size(), false);
  for (std::size_t i : top_indices(v, kept_count(v.size(), phi))) mask[i] = true;
  return mask;
}

void SparsifierConfig::validate() const {
  auto fraction = [](double x, const char* name) {
    if (!(x >= 0.0 && x < 1.0))
      throw std::invalid_argument(std::string("sparsifier: ") + name + " must lie in [0, 1)");
  };
  fraction(phi_ul_mu, "phi_ul_mu");
  fraction(phi_dl_sbs, "phi_dl_sbs");
  fraction(phi_ul_sbs, "phi_ul_sbs");
  fraction(phi_dl_mbs, "phi_dl_mbs");
  if (!(beta_m >= 0.0 && beta_m <= 1.0)) throw std::invalid_argument("sparsifier: beta_m must lie in [0, 1]");
  if (!(beta_s >= 0.0 && beta_s <= 1.0)) throw std::invalid_argument("sparsifier: beta_s must lie in [0, 1]");
}

SparseVector mu_sparse_step(ErrorBuffers& buffers, std::span<const double> grad, double sigma,
                            double phi) {
  if (buffers.u.size() != grad.size() || buffers.v.size() != grad.size())
    throw std::invalid_argument("mu_sparse_step: dimension mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    buffers.u[i] = sigma * buffers.u[i] + grad[i];
    buffers.v[i] += buffers.u[i];
  }
  SparseVector payload = top_fraction(buffers.v, phi);
  for (std::size_t i : payload.indices) {
    buffers.u[i] = 0.0;
    buffers.v[i] = 0.0;
  }
  return payload;
}

std::vector<double> apply_discounted_error(std::span<const double> delta,
                                           std::span<const double> error, double beta) {
  if (delta.size() != error.size())
    throw std::invalid_argument("apply_discounted_error: dimension mismatch");
  std::vector<double> out(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) out[i] = delta[i] + beta * error[i];
  return out;
}

}  // namespace hfl::sparsify
