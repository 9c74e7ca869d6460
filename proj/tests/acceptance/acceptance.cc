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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "hfl/allocation.hpp"
#include "hfl/channel.hpp"
#include "hfl/dataset.hpp"
#include "hfl/model.hpp"
#include "hfl/rng.hpp"
#include "hfl/sim.hpp"
#include "hfl/training.hpp"

namespace ch = hfl::channel;
namespace ln = hfl::learning;
namespace sim = hfl::sim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Reports reused by the determinism criterion.
std::map<std::string, std::pair<sim::SimConfig, std::string>> g_reports;

sim::Report run(const std::string& name, const std::string& raw, const std::vector<std::string>& sets = {}) {
  const auto cfg = sim::validate_config(raw, sets);
  auto report = sim::run_experiment(cfg);
  const auto dir = (std::filesystem::temp_directory_path() / "hfl_acceptance" / name / "a").string();
  std::filesystem::remove_all(dir);
  g_reports[name] = {cfg, sim::write_report(report, dir, cfg.experiment)};
  return report;
}

double cell(const sim::Table& t, std::size_t row, const std::string& col) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), col);
  return std::stod(t.rows.at(row).at(static_cast<std::size_t>(it - t.columns.begin())));
}

Outcome allocation_optimality() {
  const auto radio = ch::RadioParams::table2();
  hfl::Rng rng(hfl::derive_seed(2026, {1}));
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.below(3);
    const std::size_t m = k + rng.below(9 - k);
    std::vector<ch::LinkBudget> users;
    for (std::size_t i = 0; i < k; ++i) users.push_back(radio.budget(radio.p_mu, 50.0 + 650.0 * rng.uniform()));
    const double greedy = hfl::allocation::allocate_maxmin(users, m).min_rate;
    const double best = oracle::maxmin_enumerate(users, m).second;
    worst = std::max(worst, rel(greedy, best));
  }
  return {worst <= 1e-9, "100 instances, worst relative gap " + fmt("%.3g", worst)};
}

Outcome threshold_optimizer() {
  hfl::Rng rng(hfl::derive_seed(2026, {2}));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = oracle::random_budget(rng);
    const std::size_t n = 1 + rng.below(40);
    const double got = ch::optimize_threshold(n, b).expected_rate;
    worst = std::max(worst, rel(got, oracle::grid_max_rate(n, b, 1'000'000)));
  }
  return {worst <= 1e-6, "20 budgets against a 10^6-point grid, worst relative gap " + fmt("%.3g", worst)};
}

Outcome power_constraint() {
  const auto radio = ch::RadioParams::table2();
  hfl::Rng rng(hfl::derive_seed(2026, {3}));
  const std::size_t draws = 1'000'000;
  bool ok = true;
  double worst = 0.0;
  for (auto [p, d, n] : {std::tuple{radio.p_mu, 300.0, std::size_t{150}}, std::tuple{radio.p_mu, 650.0, std::size_t{20}},
                         std::tuple{radio.p_sbs, 150.0, std::size_t{86}}, std::tuple{radio.p_mbs, 700.0, std::size_t{600}}}) {
    const auto b = radio.budget(p, d);
    const auto sol = ch::optimize_threshold(n, b);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      const double x = ch::allocated_power(rng.exponential(), sol.gamma_th, sol.rho, b);
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
    const double cap = b.p_max / static_cast<double>(n);
    ok = ok && mean <= cap + 3.0 * se && rel(mean, cap) <= 0.01;
    worst = std::max(worst, rel(mean, cap));
  }
  return {ok, "4 budgets at 10^6 draws, mean within 3 s.e. of the cap, worst deviation " + fmt("%.3g", worst)};
}

Outcome speedup_vs_period() {
  const auto r = run("period", R"({"experiment": "latency_speedup_vs_mus"})",
                     {"sweep.mus_per_cluster=[4]", "sweep.periods=[2,4,6]"});
  std::string s;
  bool ok = r.table.rows.size() == 3;
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    const double v = cell(r.table, i, "speedup");
    s += (i ? ", " : "") + fmt("%.4f", v);
    ok = ok && v > 1.0 && (i == 0 || v >= cell(r.table, i - 1, "speedup"));
  }
  return {ok, "speedup at H = 2, 4, 6: " + s};
}

Outcome speedup_vs_alpha() {
  const auto r = run("alpha", R"({"experiment": "latency_speedup_vs_alpha"})", {"sweep.periods=[4]"});
  std::string s;
  bool ok = r.table.rows.size() == 4;
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    const double v = cell(r.table, i, "speedup");
    s += (i ? ", " : "") + fmt("%.4f", v);
    ok = ok && (i == 0 || v > cell(r.table, i - 1, "speedup"));
  }
  return {ok, "speedup at alpha = 2.0, 2.4, 2.8, 3.2: " + s};
}

Outcome sparsity_speedup() {
  const auto r = run("sparsity", R"({"experiment": "sparsity_speedup"})", {"sweep.periods=[4]"});
  const auto cfg = g_reports["sparsity"].first;
  bool ok = r.table.rows.size() == 3;
  std::string s;
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    ok = ok && cell(r.table, i, "t_fl_sparse") < cell(r.table, i, "t_fl_dense");
    ok = ok && cell(r.table, i, "gamma_hfl_sparse") < cell(r.table, i, "gamma_hfl_dense");
    // (1 - phi)(Q^ + ceil(log2 Q)) / Q^ as an exact rational: kept * 56 * 100 == Q * 56.
    const auto dense = static_cast<unsigned long long>(cell(r.table, i, "ul_mu_bits_dense"));
    const auto sparse = static_cast<unsigned long long>(cell(r.table, i, "ul_mu_bits_sparse"));
    const unsigned long long q = cfg.payload.q_params, qb = cfg.payload.q_bits;
    unsigned long long index_bits = 0;
    while ((1ULL << index_bits) < q) ++index_bits;
    ok = ok && dense == q * qb && sparse * 100 == q * (qb + index_bits);
    ok = ok && cell(r.table, i, "ul_mu_ratio") == static_cast<double>(qb + index_bits) / static_cast<double>(100 * qb);
    s += (i ? "; " : "") + std::string("N=") + r.table.rows[i][0] + " FL " +
         fmt("%.4f", cell(r.table, i, "fl_ratio")) + " HFL " + fmt("%.4f", cell(r.table, i, "hfl_ratio"));
  }
  return {ok, "sparse/dense latency " + s + "; MU uplink ratio " + r.table.rows.at(0).at(4)};
}

struct Task {
  ln::Dataset data;
  ln::ModelSpec spec = ln::ModelSpec::softmax_linear(32, 4);
  std::vector<std::vector<std::size_t>> shards;
  std::size_t step = 0;

  Task() {
    ln::GaussianMixtureConfig g;
    g.n_train = 20000;
    g.n_test = 10;
    data = ln::make_gaussian_mixture(g).first;
    shards = ln::contiguous_shards(data.size(), 28);
  }

  ln::GradientFn fn() {
    return [this](std::size_t mu, std::span<const double> w) {
      std::vector<std::size_t> b(64);
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = shards[mu][(step * b.size() + i) % shards[mu].size()];
      return ln::forward_loss_grad(spec, w, data, b, 1e-4);
    };
  }
};

double max_rel(const ln::TrainState& a, const ln::TrainState& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.mus.size(); ++k) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.mus[k].w.size(); ++i) {
      num = std::max(num, std::abs(a.mus[k].w[i] - b.mus[k].w[i]));
      den = std::max(den, std::abs(a.mus[k].w[i]));
    }
    worst = std::max(worst, den == 0.0 ? num : num / den);
  }
  return worst;
}

Outcome reductions() {
  Task task;
  auto fn = task.fn();
  const auto w0 = ln::init_params(task.spec, 1);
  ln::TrainConfig cfg;
  cfg.momentum = 0.0;
  cfg.sparsifier = {};
  cfg.period = 4;
  const auto clusters = ln::Clustering::uniform(7, 4);
  const double lr = 0.1;

  double sparse_hfl = 0.0, sparse_fl = 0.0, one_cluster = 0.0;
  {
    auto a = ln::TrainState::init(w0, 28, 7), b = a;
    for (task.step = 0; task.step < 20; ++task.step) {
      ln::sparse_hfl_step(a, fn, lr, cfg, clusters);
      ln::hfl_step(b, fn, lr, cfg, clusters);
      sparse_hfl = std::max(sparse_hfl, max_rel(a, b));
    }
  }
  {
    auto c = cfg;
    c.fl_aggregate = ln::Aggregate::kSum;
    auto a = ln::TrainState::init(w0, 28, 1), b = a;
    for (task.step = 0; task.step < 20; ++task.step) {
      ln::sparse_fl_step(a, fn, lr / 28, c);
      ln::fl_step(b, fn, lr, c);
      sparse_fl = std::max(sparse_fl, max_rel(a, b));
    }
  }
  {
    auto c = cfg;
    c.momentum = 0.9;
    auto a = ln::TrainState::init(w0, 28, 1), b = a;
    for (task.step = 0; task.step < 20; ++task.step) {
      ln::hfl_step(a, fn, lr, c, ln::Clustering::single(28));
      ln::fl_step(b, fn, lr, c);
      one_cluster = std::max(one_cluster, max_rel(a, b));
    }
  }
  const bool ok = sparse_hfl <= 1e-10 && sparse_fl <= 1e-10 && one_cluster <= 1e-10;
  return {ok, "20 steps, worst relative gap SparseHFL->HFL " + fmt("%.3g", sparse_hfl) + ", SparseFL->FL " +
                  fmt("%.3g", sparse_fl) + ", HFL(N=1)->FL " + fmt("%.3g", one_cluster)};
}

Outcome gradients() {
  hfl::Rng data_rng(hfl::derive_seed(2026, {8}));
  ln::Dataset data;
  data.n_features = 32;
  data.n_classes = 4;
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 32; ++j) data.features.push_back(data_rng.normal());
    data.labels.push_back(data_rng.below(4));
  }
  std::vector<std::size_t> batch(64);
  for (std::size_t i = 0; i < 64; ++i) batch[i] = i;
  std::string s;
  bool ok = true;
  for (const auto& spec : {ln::ModelSpec::softmax_linear(32, 4), ln::ModelSpec::mlp(32, 16, 4)}) {
    hfl::Rng rng(hfl::derive_seed(2026, {8, static_cast<std::uint64_t>(spec.kind)}));
    auto w = ln::init_params(spec, 8);
    for (double& x : w) x += 0.1 * rng.normal();
    const auto lg = ln::forward_loss_grad(spec, w, data, batch, 1e-3);
    const std::vector<long double> wl(w.begin(), w.end());
    const long double h = 1e-5L;
    double worst = 0.0;
    const auto base = oracle::relu_pattern(spec, wl, data, batch);
    std::size_t skipped = 0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t i = rng.below(w.size());
      auto plus = wl, minus = wl;
      plus[i] += h;
      minus[i] -= h;
      if (oracle::relu_pattern(spec, plus, data, batch) != base ||
          oracle::relu_pattern(spec, minus, data, batch) != base) {
        ++skipped;
        --t;
        continue;
      }
      const double fd = static_cast<double>((oracle::reference_loss(spec, plus, data, batch, 1e-3) -
                                             oracle::reference_loss(spec, minus, data, batch, 1e-3)) /
                                            (2.0L * h));
      worst = std::max(worst, std::abs(fd - lg.grad[i]) / std::max({std::abs(fd), std::abs(lg.grad[i]), 1e-6}));
    }
    ok = ok && worst <= 1e-5 && skipped < 100;
    s += (s.empty() ? "" : ", ") + ln::to_string(spec.kind) + " " + fmt("%.3g", worst) + " (" +
         std::to_string(skipped) + " kink-straddling draws redrawn)";
  }
  return {ok, "1000 coordinates per model, worst relative error " + s};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome learning_sanity() {
  const auto r = run("training", R"({"experiment": "training_run"})",
                     {"sweep.algorithms=[\"baseline\",\"sparse_hfl\"]", "sweep.periods=[2,4,6]",
                      "sweep.seeds=[1,2,3,4,5]"});
  const auto& cfg = g_reports["training"].first;
  std::map<std::string, std::vector<double>> acc;
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    if (static_cast<std::size_t>(cell(r.table, i, "epoch")) != cfg.training.train.epochs) continue;
    const auto& row = r.table.rows[i];
    acc[row[0] == "baseline" ? "baseline" : "H=" + row[1]].push_back(cell(r.table, i, "test_accuracy"));
  }
  const double base = median(acc["baseline"]);
  bool ok = acc["baseline"].size() == 5 && acc.size() == 4;
  std::string s = "baseline " + fmt("%.4f", base);
  for (const auto& [key, v] : acc) {
    if (key == "baseline") continue;
    const double m = median(v);
    ok = ok && v.size() == 5 && std::abs(m - base) <= 0.02;
    s += ", " + key + " " + fmt("%.4f", m);
  }
  return {ok, "median test accuracy over 5 seeds: " + s};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  bool ok = g_reports.size() == 4;
  std::string s;
  for (const auto& [name, entry] : g_reports) {
    const auto& [cfg, path] = entry;
    const auto dir = (std::filesystem::temp_directory_path() / "hfl_acceptance" / name / "b").string();
    std::filesystem::remove_all(dir);
    const auto again = sim::write_report(sim::run_experiment(cfg), dir, cfg.experiment);
    const auto a = slurp(path), b = slurp(again);
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    s += (s.empty() ? "" : ", ") + std::string(sim::to_string(cfg.experiment)) + (same ? " identical" : " DIFFERS");
  }
  return {ok, s};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_seconds;  // 0: no runtime bound
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"allocation optimality", 30, allocation_optimality},
      {"threshold optimizer vs grid", 60, threshold_optimizer},
      {"power-constraint conformance", 0, power_constraint},
      {"speedup trend over H", 120, speedup_vs_period},
      {"speedup trend over alpha", 120, speedup_vs_alpha},
      {"sparsity speedup", 0, sparsity_speedup},
      {"reduction equivalences", 30, reductions},
      {"gradient correctness", 0, gradients},
      {"learning sanity", 300, learning_sanity},
      {"determinism", 0, determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.limit_seconds) + " s limit";
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
