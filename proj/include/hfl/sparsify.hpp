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

// Top-fraction sparsification and the error-feedback state used by sparse
// federated SGD.

#ifndef HFL_SPARSIFY_HPP_
#define HFL_SPARSIFY_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

namespace hfl::sparsify {

struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::size_t> indices;  // strictly increasing
  std::vector<double> values;

  std::size_t count() const { return indices.size(); }
  std::vector<double> densify() const;
  // Throws std::invalid_argument if the invariants do not hold.
  void validate() const;
};

// Wire format: {"dim", "count", "indices", "values"}.
nlohmann::json to_json(const SparseVector& v);
SparseVector sparse_from_json(const nlohmann::json& j);

// Number of entries kept when a fraction phi of `dim` is withheld:
// ceil((1 - phi) * dim), with representation error in phi ignored
// (phi = 0.99, dim = 100 keeps exactly 1).
std::size_t kept_count(std::size_t dim, double phi);

// Keeps the kept_count(v.size(), phi) largest-magnitude entries. Magnitude
// ties go to the lower index.
SparseVector top_fraction(std::span<const double> v, double phi);

// True exactly where top_fraction keeps an entry.
std::vector<bool> threshold_mask(std::span<const double> v, double phi);

// Momentum (u) and accumulated correction (v) of one sender.
struct ErrorBuffers {
  std::vector<double> u;
  std::vector<double> v;

  static ErrorBuffers zeros(std::size_t dim) { return {std::vector<double>(dim), std::vector<double>(dim)}; }
  std::size_t dim() const { return u.size(); }
};

struct SparsifierConfig {
  double phi_ul_mu = 0.0;   // MU -> SBS (or MBS in flat FL)
  double phi_dl_sbs = 0.0;  // SBS -> MU
  double phi_ul_sbs = 0.0;  // SBS -> MBS
  double phi_dl_mbs = 0.0;  // MBS -> SBS (or MU in flat FL)
  double beta_m = 0.2;      // discount on the MBS residual
  double beta_s = 0.5;      // discount on the SBS downlink residual

  void validate() const;
};

// One sender-side step with momentum correction:
//   u <- sigma u + grad;  v <- v + u;  payload = v on the top-(1-phi) mask;
//   u and v are cleared on the mask.
// Throws std::invalid_argument on dimension mismatch.
SparseVector mu_sparse_step(ErrorBuffers& buffers, std::span<const double> grad, double sigma,
                            double phi);

// delta + beta * error
std::vector<double> apply_discounted_error(std::span<const double> delta,
                                           std::span<const double> error, double beta);

}  // namespace hfl::sparsify

#endif  // HFL_SPARSIFY_HPP_
