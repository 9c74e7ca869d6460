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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "hfl/rng.hpp"
#include "hfl/sim.hpp"

namespace hfl::sim {
namespace {

constexpr std::uint64_t kTagFl = 0x666cULL;
constexpr std::uint64_t kTagHfl = 0x68666cULL;
constexpr std::uint64_t kTagData = 0x64617461ULL;

std::string str(std::uint64_t v) { return std::to_string(v); }

latency::HopPayloads payloads_for(std::uint64_t q, std::uint32_t q_bits,
                                  const sparsify::SparsifierConfig& sp) {
  return latency::HopPayloads::sparse(q, q_bits, sp);
}

Table speedup_sweep(const SimConfig& cfg, bool over_alpha) {
  Table t;
  t.columns = {"mus_per_cluster", "period", "alpha", "n_colors", "t_fl", "gamma_hfl", "speedup"};
  const auto payloads = payloads_for(cfg.payload.q_params, cfg.payload.q_bits, cfg.sparsity);
  const std::vector<double> alphas = over_alpha ? cfg.sweep.alphas : std::vector<double>{cfg.radio.alpha};
  const std::vector<std::size_t> mus =
      over_alpha ? std::vector<std::size_t>{cfg.layout.mus_per_cluster} : cfg.sweep.mus_per_cluster;
  for (double alpha : alphas) {
    for (std::size_t m : mus) {
      for (std::size_t h : cfg.sweep.periods) {
        const LatencyPoint p = latency_point(cfg, m, h, alpha, payloads);
        t.rows.push_back({str(m), str(h), format_number(alpha), str(p.n_colors),
                          format_number(p.t_fl), format_number(p.gamma_hfl),
                          format_number(p.speedup)});
      }
    }
  }
  return t;
}

Table sparsity_sweep(const SimConfig& cfg) {
  Table t;
  t.columns = {"mus_per_cluster", "period",         "ul_mu_bits_dense", "ul_mu_bits_sparse",
               "ul_mu_ratio",     "t_fl_dense",     "t_fl_sparse",      "fl_ratio",
               "gamma_hfl_dense", "gamma_hfl_sparse", "hfl_ratio"};
  const auto dense = latency::HopPayloads::dense(cfg.payload.q_params, cfg.payload.q_bits);
  const auto sparse = payloads_for(cfg.payload.q_params, cfg.payload.q_bits, cfg.sparsity);
  for (std::size_t m : cfg.sweep.mus_per_cluster) {
    for (std::size_t h : cfg.sweep.periods) {
      const LatencyPoint d = latency_point(cfg, m, h, cfg.radio.alpha, dense);
      const LatencyPoint s = latency_point(cfg, m, h, cfg.radio.alpha, sparse);
      t.rows.push_back({str(m), str(h), str(dense.ul_mu), str(sparse.ul_mu),
                        format_number(static_cast<double>(sparse.ul_mu) / static_cast<double>(dense.ul_mu)),
                        format_number(d.t_fl), format_number(s.t_fl),
                        format_number(s.t_fl / d.t_fl), format_number(d.gamma_hfl),
                        format_number(s.gamma_hfl), format_number(s.gamma_hfl / d.gamma_hfl)});
    }
  }
  return t;
}

std::pair<learning::Dataset, learning::Dataset> load_data(const SimConfig& cfg, std::uint64_t seed) {
  const auto& d = cfg.training.dataset;
  if (!d.train_csv.empty()) return {learning::load_csv(d.train_csv), learning::load_csv(d.test_csv)};
  learning::GaussianMixtureConfig g;
  g.n_train = d.n_train;
  g.n_test = d.n_test;
  g.n_features = d.n_features;
  g.n_classes = d.n_classes;
  g.mean_radius = d.mean_radius;
  g.seed = derive_seed(seed, {kTagData});
  return learning::make_gaussian_mixture(g);
}

// Simulated communication cost of one iteration of `algorithm` for a model
// of q parameters.
learning::LatencyCosts training_costs(const SimConfig& cfg, const std::string& algorithm,
                                      std::size_t period, std::uint64_t q) {
  if (algorithm == "baseline") return {};
  const bool sparse = algorithm.rfind("sparse_", 0) == 0;
  const auto payloads = sparse ? payloads_for(q, cfg.payload.q_bits, cfg.sparsity)
                               : latency::HopPayloads::dense(q, cfg.payload.q_bits);
  SimConfig c = cfg;
  c.payload.q_params = q;
  const LatencyPoint p = latency_point(c, cfg.layout.mus_per_cluster, period, cfg.radio.alpha, payloads);
  const bool flat = algorithm == "fl" || algorithm == "sparse_fl";
  return {flat ? p.t_fl : p.gamma_hfl, 0.0};
}

Table training_sweep(const SimConfig& cfg) {
  Table t;
  t.columns = {"algorithm",   "period",      "seed",        "epoch",      "train_loss",
               "test_accuracy", "bits_mu_ul", "bits_sbs_dl", "bits_sbs_ul", "bits_mbs_dl",
               "simulated_seconds"};
  const std::vector<std::uint64_t> seeds =
      cfg.sweep.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : cfg.sweep.seeds;
  const std::size_t n_clusters = cfg.layout.n_clusters;
  const std::size_t per_cluster = cfg.layout.mus_per_cluster;
  std::map<std::pair<std::string, std::size_t>, learning::LatencyCosts> costs;

  for (std::uint64_t seed : seeds) {
    const auto [train_set, test_set] = load_data(cfg, seed);
    const learning::ModelSpec spec =
        cfg.training.model == learning::ModelKind::kMlp
            ? learning::ModelSpec::mlp(train_set.n_features, cfg.training.hidden_dim, train_set.n_classes)
            : learning::ModelSpec::softmax_linear(train_set.n_features, train_set.n_classes);
    for (const auto& name : cfg.sweep.algorithms) {
      const bool hierarchical = name == "hfl" || name == "sparse_hfl";
      const std::vector<std::size_t> periods =
          hierarchical ? cfg.sweep.periods : std::vector<std::size_t>{1};
      for (std::size_t h : periods) {
        learning::TrainConfig tc = cfg.training.train;
        tc.seed = seed;
        tc.period = h;
        const auto clusters = name == "baseline"
                                  ? learning::Clustering::single(1)
                                  : learning::Clustering::uniform(n_clusters, per_cluster);
        const auto algorithm = name == "baseline" ? learning::Algorithm::kFL
                                                  : learning::algorithm_from_string(name);
        auto key = std::pair{name, h};
        if (!costs.count(key)) costs[key] = training_costs(cfg, name, h, spec.param_count());
        const auto result = learning::train(algorithm, train_set, test_set, clusters, spec, tc, costs[key]);
        for (const auto& e : result.history.epochs) {
          t.rows.push_back({name, str(h), str(seed), str(e.epoch), format_number(e.train_loss),
                            format_number(e.test_accuracy), str(e.bits.mu_ul),
                            str(e.bits.sbs_dl), str(e.bits.sbs_ul), str(e.bits.mbs_dl),
                            format_number(e.simulated_seconds)});
        }
      }
    }
  }
  return t;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += field(cells[i]);
    }
    out += "\r\n";
  };
  line(table.columns);
  for (const auto& row : table.rows) line(row);
  return out;
}

LatencyPoint latency_point(const SimConfig& cfg, std::size_t mus_per_cluster, std::size_t period,
                           double alpha, const latency::HopPayloads& payloads) {
  topology::LayoutConfig lc = cfg.layout;
  lc.mus_per_cluster = mus_per_cluster;
  channel::RadioParams radio = cfg.radio;
  radio.alpha = alpha;
  const auto layout = topology::build_layout(lc);
  const auto fl = latency::fl_iteration_latency(layout, radio, payloads.ul_mu, payloads.dl_mbs,
                                                cfg.latency, derive_seed(cfg.seed, {kTagFl}));
  const auto hfl = latency::hfl_period_latency(layout, radio, period, payloads, cfg.latency,
                                               derive_seed(cfg.seed, {kTagHfl}), cfg.n_colors);
  LatencyPoint p;
  p.n_colors = hfl.n_colors;
  p.t_fl = fl.total;
  p.gamma_hfl = hfl.breakdown.gamma_per_iter;
  p.speedup = p.t_fl / p.gamma_hfl;
  return p;
}

Report run_experiment(const SimConfig& cfg) {
  Report r;
  switch (cfg.experiment) {
    case Experiment::kLatencySpeedupVsMus: r.table = speedup_sweep(cfg, false); break;
    case Experiment::kLatencySpeedupVsAlpha: r.table = speedup_sweep(cfg, true); break;
    case Experiment::kSparsitySpeedup: r.table = sparsity_sweep(cfg); break;
    case Experiment::kTrainingRun: r.table = training_sweep(cfg); break;
  }
  r.manifest = {{"tool", "hfl-sim"},
                {"version", kVersion},
                {"experiment", to_string(cfg.experiment)},
                {"seed", cfg.seed},
                {"config_hash", config_hash(cfg)},
                {"csv", to_string(cfg.experiment) + ".csv"},
                {"columns", r.table.columns},
                {"rows", r.table.rows.size()},
                {"config", to_json(cfg)}};
  return r;
}

std::string write_report(const Report& report, const std::string& dir, Experiment experiment) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  const auto csv = base / (to_string(experiment) + ".csv");
  write_atomic(csv, to_csv(report.table));
  write_atomic(base / (to_string(experiment) + ".manifest.json"), report.manifest.dump(2) + "\n");
  return csv.string();
}

}  // namespace hfl::sim
