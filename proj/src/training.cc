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

#include "hfl/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "hfl/latency.hpp"
#include "hfl/rng.hpp"

namespace hfl::learning {
namespace {

constexpr std::uint64_t kTagInit = 0x696e6974ULL;
constexpr std::uint64_t kTagBatch = 0x6261746368ULL;

std::uint64_t hop_bits(std::uint64_t q, const TrainConfig& cfg, double phi) {
  const std::uint32_t idx = cfg.index_bits != 0 ? cfg.index_bits : latency::default_index_bits(q);
  return latency::payload_bits({q, cfg.q_bits, phi, idx});
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void add_sparse(const sparsify::SparseVector& s, double scale, std::span<double> y) {
  for (std::size_t i = 0; i < s.indices.size(); ++i) y[s.indices[i]] += scale * s.values[i];
}

void check_state(const TrainState& state, const Clustering& clusters) {
  if (state.mus.size() != clusters.n_mus() || state.sbs.size() != clusters.n_clusters)
    throw std::invalid_argument("training: state does not match the clustering");
  std::vector<std::size_t> sizes(clusters.n_clusters, 0);
  for (std::size_t c : clusters.cluster_of_mu) {
    if (c >= clusters.n_clusters) throw std::invalid_argument("training: cluster index out of range");
    ++sizes[c];
  }
  for (std::size_t s : sizes)
    if (s == 0) throw std::invalid_argument("training: empty cluster");
}

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kFL: return "fl";
    case Algorithm::kHFL: return "hfl";
    case Algorithm::kSparseFL: return "sparse_fl";
    case Algorithm::kSparseHFL: return "sparse_hfl";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "fl") return Algorithm::kFL;
  if (name == "hfl") return Algorithm::kHFL;
  if (name == "sparse_fl") return Algorithm::kSparseFL;
  if (name == "sparse_hfl") return Algorithm::kSparseHFL;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string to_string(Aggregate a) { return a == Aggregate::kMean ? "mean" : "sum"; }

Aggregate aggregate_from_string(const std::string& name) {
  if (name == "mean") return Aggregate::kMean;
  if (name == "sum") return Aggregate::kSum;
  throw std::invalid_argument("unknown aggregate: " + name);
}

double LrSchedule::at(std::size_t iteration, std::size_t steps_per_epoch) const {
  const std::size_t spe = std::max<std::size_t>(steps_per_epoch, 1);
  const std::size_t epoch = (iteration - 1) / spe;
  double lr = base;
  const std::size_t warmup_steps = warmup_epochs * spe;
  if (iteration <= warmup_steps)
    lr *= static_cast<double>(iteration) / static_cast<double>(warmup_steps);
  for (std::size_t e : decay_epochs)
    if (epoch >= e) lr *= decay_factor;
  return lr;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (period < 1) throw std::invalid_argument("train: period must be >= 1");
  if (!(lr.base > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("train: momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("train: weight_decay must be >= 0");
  if (!(lr.decay_factor > 0.0)) throw std::invalid_argument("train: decay_factor must be > 0");
  if (q_bits < 1) throw std::invalid_argument("train: q_bits must be >= 1");
  sparsifier.validate();
}

Clustering Clustering::single(std::size_t n_mus) {
  return {std::vector<std::size_t>(n_mus, 0), 1};
}

Clustering Clustering::uniform(std::size_t n_clusters, std::size_t mus_per_cluster) {
  Clustering c;
  c.n_clusters = n_clusters;
  for (std::size_t n = 0; n < n_clusters; ++n)
    for (std::size_t j = 0; j < mus_per_cluster; ++j) c.cluster_of_mu.push_back(n);
  return c;
}

Clustering Clustering::from_layout(const topology::NetworkLayout& layout) {
  return {layout.cluster_of_mu, layout.n_clusters()};
}

std::vector<std::size_t> Clustering::members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < cluster_of_mu.size(); ++k)
    if (cluster_of_mu[k] == cluster) out.push_back(k);
  return out;
}

TrainState TrainState::init(std::span<const double> w0, std::size_t n_mus, std::size_t n_clusters) {
  const std::vector<double> w(w0.begin(), w0.end());
  const std::vector<double> zeros(w.size(), 0.0);
  TrainState s;
  s.mus.assign(n_mus, MuState{w, zeros, sparsify::ErrorBuffers::zeros(w.size())});
  s.sbs.assign(n_clusters, SbsState{w, w, zeros, zeros});
  s.mbs = MbsState{w, zeros};
  return s;
}

std::vector<double> TrainState::consensus() const {
  std::vector<double> mean(dim(), 0.0);
  for (const auto& mu : mus) axpy(1.0, mu.w, mean);
  for (double& x : mean) x /= static_cast<double>(mus.size());
  return mean;
}

double fl_step(TrainState& state, const GradientFn& grad, double lr, const TrainConfig& cfg) {
  const std::size_t k_mus = state.mus.size();
  const std::size_t q = state.dim();
  ++state.iteration;
  std::vector<double> g(q, 0.0);
  double loss = 0.0;
  for (std::size_t k = 0; k < k_mus; ++k) {
    const LossGrad lg = grad(k, state.mus[k].w);
    loss += lg.loss;
    axpy(1.0 / static_cast<double>(k_mus), lg.grad, g);
  }
  for (auto& mu : state.mus) {
    for (std::size_t i = 0; i < q; ++i) {
      mu.momentum[i] = cfg.momentum * mu.momentum[i] + g[i];
      mu.w[i] -= lr * mu.momentum[i];
    }
  }
  state.mbs.reference = state.mus.front().w;
  const std::uint64_t dense = hop_bits(q, cfg, 0.0);
  state.bits.mu_ul += k_mus * dense;
  state.bits.mbs_dl += dense;
  return loss / static_cast<double>(k_mus);
}

double hfl_step(TrainState& state, const GradientFn& grad, double lr, const TrainConfig& cfg,
                const Clustering& clusters) {
  check_state(state, clusters);
  const std::size_t q = state.dim();
  const std::size_t n_clusters = clusters.n_clusters;
  const std::size_t t = ++state.iteration;
  double loss = 0.0;
  for (std::size_t n = 0; n < n_clusters; ++n) {
    const auto members = clusters.members(n);
    std::vector<double> g(q, 0.0);
    for (std::size_t k : members) {
      const LossGrad lg = grad(k, state.mus[k].w);
      loss += lg.loss;
      axpy(1.0 / static_cast<double>(members.size()), lg.grad, g);
    }
    for (std::size_t k : members) {
      auto& mu = state.mus[k];
      for (std::size_t i = 0; i < q; ++i) {
        mu.momentum[i] = cfg.momentum * mu.momentum[i] + g[i];
        mu.w[i] -= lr * mu.momentum[i];
      }
    }
    state.sbs[n].model = state.mus[members.front()].w;
  }
  const std::uint64_t dense = hop_bits(q, cfg, 0.0);
  state.bits.mu_ul += clusters.n_mus() * dense;
  state.bits.sbs_dl += n_clusters * dense;

  if (t % cfg.period == 0) {
    std::vector<double> avg(q, 0.0);
    for (const auto& sbs : state.sbs) axpy(1.0 / static_cast<double>(n_clusters), sbs.model, avg);
    for (auto& sbs : state.sbs) sbs.model = avg;
    for (auto& mu : state.mus) mu.w = avg;
    state.mbs.reference = avg;
    ++state.syncs;
    state.bits.sbs_ul += n_clusters * dense;
    state.bits.mbs_dl += dense;
    state.bits.sbs_dl += n_clusters * dense;  // averaged model pushed to the MUs
  }
  return loss / static_cast<double>(clusters.n_mus());
}

double sparse_fl_step(TrainState& state, const GradientFn& grad, double lr,
                      const TrainConfig& cfg) {
  const std::size_t k_mus = state.mus.size();
  const std::size_t q = state.dim();
  ++state.iteration;
  const double scale = cfg.fl_aggregate == Aggregate::kMean ? 1.0 / static_cast<double>(k_mus) : 1.0;
  std::vector<double> g(q, 0.0);
  double loss = 0.0;
  for (std::size_t k = 0; k < k_mus; ++k) {
    auto& mu = state.mus[k];
    const LossGrad lg = grad(k, mu.w);
    loss += lg.loss;
    const auto payload =
        sparsify::mu_sparse_step(mu.buffers, lg.grad, cfg.momentum, cfg.sparsifier.phi_ul_mu);
    add_sparse(payload, scale, g);
  }
  for (auto& mu : state.mus) axpy(-lr, g, mu.w);
  state.mbs.reference = state.mus.front().w;
  state.bits.mu_ul += k_mus * hop_bits(q, cfg, cfg.sparsifier.phi_ul_mu);
  state.bits.mbs_dl += hop_bits(q, cfg, 0.0);
  return loss / static_cast<double>(k_mus);
}

double sparse_hfl_step(TrainState& state, const GradientFn& grad, double lr,
                       const TrainConfig& cfg, const Clustering& clusters) {
  check_state(state, clusters);
  const auto& sp = cfg.sparsifier;
  const std::size_t q = state.dim();
  const std::size_t n_clusters = clusters.n_clusters;
  const double inv_n = 1.0 / static_cast<double>(n_clusters);
  const std::size_t t = ++state.iteration;

  // MU uplink: momentum-corrected sparse payloads, combined per cluster.
  double loss = 0.0;
  std::vector<std::vector<double>> cluster_grad(n_clusters, std::vector<double>(q, 0.0));
  for (std::size_t n = 0; n < n_clusters; ++n) {
    const auto members = clusters.members(n);
    const double scale =
        cfg.sbs_aggregate == Aggregate::kMean ? 1.0 / static_cast<double>(members.size()) : 1.0;
    for (std::size_t k : members) {
      auto& mu = state.mus[k];
      const LossGrad lg = grad(k, mu.w);
      loss += lg.loss;
      add_sparse(sparsify::mu_sparse_step(mu.buffers, lg.grad, cfg.momentum, sp.phi_ul_mu), scale,
                 cluster_grad[n]);
    }
  }

  // SBS model from its reference, the step, and the discounted DL residual.
  for (std::size_t n = 0; n < n_clusters; ++n) {
    auto& sbs = state.sbs[n];
    for (std::size_t i = 0; i < q; ++i)
      sbs.model[i] = sbs.reference[i] - lr * cluster_grad[n][i] + sp.beta_s * sbs.dl_error[i];
  }

  if (t % cfg.period == 0) {
    std::vector<double> combined(q, 0.0);
    const double scale = cfg.mbs_aggregate == Aggregate::kMean ? inv_n : 1.0;
    std::vector<double> delta(q);
    for (auto& sbs : state.sbs) {
      for (std::size_t i = 0; i < q; ++i) delta[i] = sbs.model[i] - state.mbs.reference[i];
      const auto sent = sparsify::top_fraction(delta, sp.phi_ul_sbs);
      sbs.ul_error = delta;
      add_sparse(sent, -1.0, sbs.ul_error);
      add_sparse(sent, scale, combined);
    }
    const auto delta_w = sparsify::apply_discounted_error(combined, state.mbs.error, sp.beta_m);
    const auto broadcast = sparsify::top_fraction(delta_w, sp.phi_dl_mbs);
    state.mbs.error = delta_w;
    add_sparse(broadcast, -1.0, state.mbs.error);
    const std::vector<double> old_reference = state.mbs.reference;
    add_sparse(broadcast, 1.0, state.mbs.reference);
    for (auto& sbs : state.sbs) {
      sbs.model = old_reference;
      add_sparse(broadcast, 1.0, sbs.model);
      axpy(inv_n, sbs.ul_error, sbs.model);
    }
    ++state.syncs;
    state.bits.sbs_ul += n_clusters * hop_bits(q, cfg, sp.phi_ul_sbs);
    state.bits.mbs_dl += hop_bits(q, cfg, sp.phi_dl_mbs);
  }

  // SBS downlink of the sparse model difference against the MU reference.
  std::vector<double> delta(q);
  for (auto& sbs : state.sbs) {
    for (std::size_t i = 0; i < q; ++i) delta[i] = sbs.model[i] - sbs.reference[i];
    const auto sent = sparsify::top_fraction(delta, sp.phi_dl_sbs);
    add_sparse(sent, 1.0, sbs.reference);
    sbs.dl_error = delta;
    add_sparse(sent, -1.0, sbs.dl_error);
  }
  for (std::size_t k = 0; k < clusters.n_mus(); ++k)
    state.mus[k].w = state.sbs[clusters.cluster_of_mu[k]].reference;

  state.bits.mu_ul += clusters.n_mus() * hop_bits(q, cfg, sp.phi_ul_mu);
  state.bits.sbs_dl += n_clusters * hop_bits(q, cfg, sp.phi_dl_sbs);
  return loss / static_cast<double>(clusters.n_mus());
}

bool operator==(const MetricHistory& a, const MetricHistory& b) {
  if (a.epochs.size() != b.epochs.size()) return false;
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const auto& x = a.epochs[i];
    const auto& y = b.epochs[i];
    if (x.epoch != y.epoch || x.train_loss != y.train_loss || x.test_accuracy != y.test_accuracy ||
        !(x.bits == y.bits) || x.simulated_seconds != y.simulated_seconds)
      return false;
  }
  return true;
}

std::string to_csv(const MetricHistory& history) {
  std::ostringstream os;
  os << "epoch,train_loss,test_accuracy,bits_mu_ul,bits_sbs_dl,bits_sbs_ul,bits_mbs_dl,"
        "simulated_seconds\r\n";
  for (const auto& e : history.epochs) {
    os << e.epoch << ',' << format_double(e.train_loss) << ',' << format_double(e.test_accuracy)
       << ',' << e.bits.mu_ul << ',' << e.bits.sbs_dl << ',' << e.bits.sbs_ul << ','
       << e.bits.mbs_dl << ',' << format_double(e.simulated_seconds) << "\r\n";
  }
  return os.str();
}

nlohmann::json to_json(const MetricHistory& history) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : history.epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"test_accuracy", e.test_accuracy},
                    {"bits_mu_ul", e.bits.mu_ul},
                    {"bits_sbs_dl", e.bits.sbs_dl},
                    {"bits_sbs_ul", e.bits.sbs_ul},
                    {"bits_mbs_dl", e.bits.mbs_dl},
                    {"simulated_seconds", e.simulated_seconds}});
  }
  return rows;
}

TrainResult train(Algorithm algorithm, const Dataset& train_set, const Dataset& test_set,
                  const Clustering& clusters, const ModelSpec& model, const TrainConfig& cfg,
                  const LatencyCosts& costs, std::optional<std::vector<double>> initial_params) {
  cfg.validate();
  model.validate();
  const std::size_t k_mus = clusters.n_mus();
  if (k_mus < 1) throw std::invalid_argument("train: no MUs");
  if (train_set.n_features != model.n_features || test_set.n_features != model.n_features)
    throw std::invalid_argument("train: dataset features do not match the model");

  const auto shards = contiguous_shards(train_set.size(), k_mus);
  std::size_t smallest = train_set.size();
  for (const auto& s : shards) smallest = std::min(smallest, s.size());
  if (smallest < cfg.batch_size) throw std::invalid_argument("train: a shard is smaller than the batch");
  const std::size_t steps_per_epoch = smallest / cfg.batch_size;

  std::vector<double> w0 = initial_params.value_or(init_params(model, derive_seed(cfg.seed, {kTagInit})));
  if (w0.size() != model.param_count()) throw std::invalid_argument("train: initial params length");

  TrainResult result;
  result.steps_per_epoch = steps_per_epoch;
  TrainState state = TrainState::init(w0, k_mus, clusters.n_clusters);

  std::vector<Rng> batch_rngs;
  for (std::size_t k = 0; k < k_mus; ++k) batch_rngs.emplace_back(derive_seed(cfg.seed, {kTagBatch, k}));
  std::vector<std::vector<std::size_t>> order = shards;

  std::size_t step_in_epoch = 0;
  auto grad = [&](std::size_t k, std::span<const double> params) {
    const auto first = order[k].begin() + static_cast<std::ptrdiff_t>(step_in_epoch * cfg.batch_size);
    const std::vector<std::size_t> batch(first, first + static_cast<std::ptrdiff_t>(cfg.batch_size));
    return forward_loss_grad(model, params, train_set, batch, cfg.weight_decay);
  };

  double seconds = 0.0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t k = 0; k < k_mus; ++k) {
      auto& o = order[k];
      for (std::size_t i = o.size(); i > 1; --i) std::swap(o[i - 1], o[batch_rngs[k].below(i)]);
    }
    double loss_sum = 0.0;
    for (step_in_epoch = 0; step_in_epoch < steps_per_epoch; ++step_in_epoch) {
      const double lr = cfg.lr.at(state.iteration + 1, steps_per_epoch);
      const std::size_t syncs_before = state.syncs;
      switch (algorithm) {
        case Algorithm::kFL: loss_sum += fl_step(state, grad, lr, cfg); break;
        case Algorithm::kHFL: loss_sum += hfl_step(state, grad, lr, cfg, clusters); break;
        case Algorithm::kSparseFL: loss_sum += sparse_fl_step(state, grad, lr, cfg); break;
        case Algorithm::kSparseHFL: loss_sum += sparse_hfl_step(state, grad, lr, cfg, clusters); break;
      }
      seconds += costs.per_iteration;
      if (state.syncs != syncs_before) seconds += costs.per_sync;
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(steps_per_epoch);
    m.test_accuracy = evaluate(model, state.consensus(), test_set);
    m.bits = state.bits;
    m.simulated_seconds = seconds;
    result.history.epochs.push_back(m);
  }
  result.final_params = cfg.epochs == 0 ? w0 : state.consensus();
  return result;
}

HopBits expected_bits(Algorithm algorithm, std::size_t n_mus, std::size_t n_clusters,
                      std::uint64_t q_params, const TrainConfig& cfg, std::size_t iterations) {
  const auto& sp = cfg.sparsifier;
  const std::uint64_t dense = hop_bits(q_params, cfg, 0.0);
  const std::uint64_t syncs = iterations / cfg.period;
  HopBits b;
  switch (algorithm) {
    case Algorithm::kFL:
      b.mu_ul = iterations * n_mus * dense;
      b.mbs_dl = iterations * dense;
      break;
    case Algorithm::kSparseFL:
      b.mu_ul = iterations * n_mus * hop_bits(q_params, cfg, sp.phi_ul_mu);
      b.mbs_dl = iterations * dense;
      break;
    case Algorithm::kHFL:
      b.mu_ul = iterations * n_mus * dense;
      b.sbs_dl = (iterations + syncs) * n_clusters * dense;
      b.sbs_ul = syncs * n_clusters * dense;
      b.mbs_dl = syncs * dense;
      break;
    case Algorithm::kSparseHFL:
      b.mu_ul = iterations * n_mus * hop_bits(q_params, cfg, sp.phi_ul_mu);
      b.sbs_dl = iterations * n_clusters * hop_bits(q_params, cfg, sp.phi_dl_sbs);
      b.sbs_ul = syncs * n_clusters * hop_bits(q_params, cfg, sp.phi_ul_sbs);
      b.mbs_dl = syncs * hop_bits(q_params, cfg, sp.phi_dl_mbs);
      break;
  }
  return b;
}

}  // namespace hfl::learning
