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
#include <cstdio>
#include <set>
#include <sstream>
#include <utility>

#include "hfl/sim.hpp"

namespace hfl::sim {
namespace {

using nlohmann::json;

// Walks one JSON object, recording type errors and unknown keys by path.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) fail(path_, "must be an object");
  }

  ~Reader() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) fail(child(key), "unknown field");
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void fail(const std::string& where, const std::string& what) { errors_.push_back(where + ": " + what); }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) out = v->get<double>();
      else fail(child(key), "must be a number");
    }
  }

  template <typename Int>
  void read_uint(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) out = v->get<Int>();
      else fail(child(key), "must be a non-negative integer");
    }
  }
  void read(const std::string& key, std::size_t& out) { read_uint(key, out); }
  void read(const std::string& key, std::uint32_t& out) { read_uint(key, out); }
  void read(const std::string& key, unsigned long long& out) { read_uint(key, out); }

  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else fail(child(key), "must be a string");
    }
  }

  template <typename T>
  void read_list(const std::string& key, std::vector<T>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) {
      fail(child(key), "must be an array");
      return;
    }
    std::vector<T> parsed;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      const std::string where = child(key) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_same_v<T, std::string>) {
        if (!e.is_string()) return fail(where, "must be a string");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!e.is_number()) return fail(where, "must be a number");
      } else {
        if (!e.is_number_unsigned()) return fail(where, "must be a non-negative integer");
      }
      parsed.push_back(e.get<T>());
    }
    out = std::move(parsed);
  }

  // Runs `fn` on the nested object `key`, if present.
  template <typename Fn>
  void nested(const std::string& key, Fn fn) {
    if (const json* v = find(key)) {
      Reader sub(*v, child(key), errors_);
      if (v->is_object()) fn(sub);
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

template <typename Fn>
void check(std::vector<std::string>& errors, const std::string& path, Fn fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    const std::string what = e.what();
    errors.push_back(what.rfind(path + ":", 0) == 0 ? what : path + ": " + what);
  }
}

std::string join(const std::vector<std::string>& errors) {
  std::string out = "invalid configuration";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::kLatencySpeedupVsMus: return "latency_speedup_vs_mus";
    case Experiment::kLatencySpeedupVsAlpha: return "latency_speedup_vs_alpha";
    case Experiment::kSparsitySpeedup: return "sparsity_speedup";
    case Experiment::kTrainingRun: return "training_run";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& name) {
  for (Experiment e : {Experiment::kLatencySpeedupVsMus, Experiment::kLatencySpeedupVsAlpha,
                       Experiment::kSparsitySpeedup, Experiment::kTrainingRun})
    if (to_string(e) == name) return e;
  throw std::invalid_argument("unknown experiment: " + name);
}

std::vector<std::string> preset_names() { return {"table2", "text"}; }

json preset_json(const std::string& name) {
  SimConfig cfg;
  cfg.preset = name;
  if (name == "table2") {
    cfg.radio = channel::RadioParams::table2();
  } else if (name == "text") {
    cfg.radio = channel::RadioParams::text();
  } else {
    throw ConfigError({"preset: unknown preset '" + name + "'"});
  }
  cfg.sparsity.phi_ul_mu = 0.99;
  cfg.sparsity.phi_dl_sbs = 0.9;
  cfg.sparsity.phi_ul_sbs = 0.9;
  cfg.sparsity.phi_dl_mbs = 0.9;
  cfg.training.train.lr.warmup_epochs = 1;
  cfg.training.train.lr.decay_epochs = {10, 15};
  return to_json(cfg);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError({"--set: expected key=value, got '" + assignment + "'"});
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError({key + ": parent is not an object"});
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError({key + ": parent is not an object"});
  (*node)[parts.back()] = value;
}

json to_json(const SimConfig& c) {
  const auto& t = c.training.train;
  const auto& sp = c.sparsity;
  json j;
  j["preset"] = c.preset;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["layout"] = {{"deployment_radius", c.layout.deployment_radius},
                 {"hex_inscribed_diameter", c.layout.hex_inscribed_diameter},
                 {"n_clusters", c.layout.n_clusters},
                 {"mus_per_cluster", c.layout.mus_per_cluster},
                 {"reuse_distance", c.layout.reuse_distance}};
  j["radio"] = {{"n_subcarriers", c.radio.n_subcarriers},
                {"subcarrier_spacing", c.radio.subcarrier_spacing},
                {"noise_dbw", c.radio.noise_dbw},
                {"p_mbs", c.radio.p_mbs},
                {"p_sbs", c.radio.p_sbs},
                {"p_mu", c.radio.p_mu},
                {"alpha", c.radio.alpha},
                {"ber", c.radio.ber}};
  j["latency"] = {{"slot_duration", c.latency.slot_duration},
                  {"fronthaul_multiplier", c.latency.fronthaul_multiplier},
                  {"mc_replicas", c.latency.mc_replicas},
                  {"sampling", c.latency.sampling == latency::BroadcastSampling::kPerUser
                                   ? "per_user"
                                   : "collapsed_minimum"},
                  {"max_slots", c.latency.max_slots}};
  j["payload"] = {{"q_params", c.payload.q_params}, {"q_bits", c.payload.q_bits}};
  j["sparsity"] = {{"phi_ul_mu", sp.phi_ul_mu}, {"phi_dl_sbs", sp.phi_dl_sbs},
                   {"phi_ul_sbs", sp.phi_ul_sbs}, {"phi_dl_mbs", sp.phi_dl_mbs},
                   {"beta_m", sp.beta_m},       {"beta_s", sp.beta_s}};
  j["n_colors"] = c.n_colors ? json(*c.n_colors) : json(nullptr);
  const auto& d = c.training.dataset;
  j["training"] = {
      {"model", learning::to_string(c.training.model)},
      {"hidden_dim", c.training.hidden_dim},
      {"dataset",
       {{"n_train", d.n_train},
        {"n_test", d.n_test},
        {"n_features", d.n_features},
        {"n_classes", d.n_classes},
        {"mean_radius", d.mean_radius},
        {"train_csv", d.train_csv},
        {"test_csv", d.test_csv}}},
      {"batch_size", t.batch_size},
      {"lr", t.lr.base},
      {"warmup_epochs", t.lr.warmup_epochs},
      {"decay_epochs", t.lr.decay_epochs},
      {"decay_factor", t.lr.decay_factor},
      {"momentum", t.momentum},
      {"weight_decay", t.weight_decay},
      {"epochs", t.epochs},
      {"fl_aggregate", learning::to_string(t.fl_aggregate)},
      {"sbs_aggregate", learning::to_string(t.sbs_aggregate)},
      {"mbs_aggregate", learning::to_string(t.mbs_aggregate)}};
  j["sweep"] = {{"periods", c.sweep.periods},
                {"mus_per_cluster", c.sweep.mus_per_cluster},
                {"alphas", c.sweep.alphas},
                {"algorithms", c.sweep.algorithms},
                {"seeds", c.sweep.seeds}};
  return j;
}

SimConfig config_from_json(const json& doc) {
  std::vector<std::string> errors;
  SimConfig c;
  {
    Reader r(doc, "", errors);
    r.read("preset", c.preset);
    std::string experiment = to_string(c.experiment);
    r.read("experiment", experiment);
    check(errors, "experiment", [&] { c.experiment = experiment_from_string(experiment); });
    r.read("seed", c.seed);
    r.read("output_dir", c.output_dir);
    r.nested("layout", [&](Reader& s) {
      s.read("deployment_radius", c.layout.deployment_radius);
      s.read("hex_inscribed_diameter", c.layout.hex_inscribed_diameter);
      s.read("n_clusters", c.layout.n_clusters);
      s.read("mus_per_cluster", c.layout.mus_per_cluster);
      s.read("reuse_distance", c.layout.reuse_distance);
    });
    r.nested("radio", [&](Reader& s) {
      s.read("n_subcarriers", c.radio.n_subcarriers);
      s.read("subcarrier_spacing", c.radio.subcarrier_spacing);
      s.read("noise_dbw", c.radio.noise_dbw);
      s.read("p_mbs", c.radio.p_mbs);
      s.read("p_sbs", c.radio.p_sbs);
      s.read("p_mu", c.radio.p_mu);
      s.read("alpha", c.radio.alpha);
      s.read("ber", c.radio.ber);
    });
    r.nested("latency", [&](Reader& s) {
      s.read("slot_duration", c.latency.slot_duration);
      s.read("fronthaul_multiplier", c.latency.fronthaul_multiplier);
      s.read("mc_replicas", c.latency.mc_replicas);
      std::string sampling = "collapsed_minimum";
      s.read("sampling", sampling);
      if (sampling == "per_user") c.latency.sampling = latency::BroadcastSampling::kPerUser;
      else if (sampling != "collapsed_minimum")
        s.fail(s.child("sampling"), "must be collapsed_minimum or per_user");
      std::uint64_t max_slots = c.latency.max_slots;
      s.read("max_slots", max_slots);
      c.latency.max_slots = max_slots;
    });
    r.nested("payload", [&](Reader& s) {
      s.read("q_params", c.payload.q_params);
      s.read("q_bits", c.payload.q_bits);
    });
    r.nested("sparsity", [&](Reader& s) {
      s.read("phi_ul_mu", c.sparsity.phi_ul_mu);
      s.read("phi_dl_sbs", c.sparsity.phi_dl_sbs);
      s.read("phi_ul_sbs", c.sparsity.phi_ul_sbs);
      s.read("phi_dl_mbs", c.sparsity.phi_dl_mbs);
      s.read("beta_m", c.sparsity.beta_m);
      s.read("beta_s", c.sparsity.beta_s);
    });
    if (const json* v = r.find("n_colors")) {
      if (v->is_number_unsigned()) c.n_colors = v->get<std::size_t>();
      else if (!v->is_null()) r.fail("n_colors", "must be null or a positive integer");
    }
    r.nested("training", [&](Reader& s) {
      auto& t = c.training.train;
      std::string model = learning::to_string(c.training.model);
      s.read("model", model);
      check(errors, "training.model", [&] { c.training.model = learning::model_kind_from_string(model); });
      s.read("hidden_dim", c.training.hidden_dim);
      s.nested("dataset", [&](Reader& d) {
        auto& ds = c.training.dataset;
        d.read("n_train", ds.n_train);
        d.read("n_test", ds.n_test);
        d.read("n_features", ds.n_features);
        d.read("n_classes", ds.n_classes);
        d.read("mean_radius", ds.mean_radius);
        d.read("train_csv", ds.train_csv);
        d.read("test_csv", ds.test_csv);
      });
      s.read("batch_size", t.batch_size);
      s.read("lr", t.lr.base);
      s.read("warmup_epochs", t.lr.warmup_epochs);
      s.read_list("decay_epochs", t.lr.decay_epochs);
      s.read("decay_factor", t.lr.decay_factor);
      s.read("momentum", t.momentum);
      s.read("weight_decay", t.weight_decay);
      s.read("epochs", t.epochs);
      for (auto [key, field] : {std::pair{"fl_aggregate", &t.fl_aggregate},
                                std::pair{"sbs_aggregate", &t.sbs_aggregate},
                                std::pair{"mbs_aggregate", &t.mbs_aggregate}}) {
        std::string value = learning::to_string(*field);
        s.read(key, value);
        check(errors, s.child(key), [&] { *field = learning::aggregate_from_string(value); });
      }
    });
    r.nested("sweep", [&](Reader& s) {
      s.read_list("periods", c.sweep.periods);
      s.read_list("mus_per_cluster", c.sweep.mus_per_cluster);
      s.read_list("alphas", c.sweep.alphas);
      s.read_list("algorithms", c.sweep.algorithms);
      s.read_list("seeds", c.sweep.seeds);
    });
  }

  // Semantic checks.
  c.layout.seed = c.seed;
  c.training.train.seed = c.seed;
  c.training.train.sparsifier = c.sparsity;
  c.training.train.q_bits = c.payload.q_bits;
  check(errors, "preset", [&] {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), c.preset) == names.end())
      throw std::invalid_argument("unknown preset '" + c.preset + "'");
  });
  check(errors, "layout", [&] { c.layout.validate(); });
  check(errors, "radio", [&] { c.radio.validate(); });
  check(errors, "latency", [&] { c.latency.validate(); });
  check(errors, "payload", [&] {
    latency::PayloadSpec{c.payload.q_params, c.payload.q_bits, 0.0, 0}.validate();
  });
  check(errors, "sparsity", [&] { c.sparsity.validate(); });
  check(errors, "training", [&] { c.training.train.validate(); });
  if (c.training.model == learning::ModelKind::kMlp && c.training.hidden_dim == 0)
    errors.push_back("training.hidden_dim: must be >= 1 for the mlp model");
  if (c.training.dataset.train_csv.empty() != c.training.dataset.test_csv.empty())
    errors.push_back("training.dataset: train_csv and test_csv must be given together");
  if (c.n_colors && (*c.n_colors < 1 || *c.n_colors > c.radio.n_subcarriers))
    errors.push_back("n_colors: must lie in [1, n_subcarriers]");
  for (std::size_t i = 0; i < c.sweep.periods.size(); ++i)
    if (c.sweep.periods[i] < 1)
      errors.push_back("sweep.periods[" + std::to_string(i) + "]: must be >= 1");
  for (std::size_t i = 0; i < c.sweep.mus_per_cluster.size(); ++i) {
    const std::size_t m = c.sweep.mus_per_cluster[i];
    const std::size_t n_colors = c.n_colors.value_or(1);
    if (m < 1 || m > c.radio.n_subcarriers / n_colors)
      errors.push_back("sweep.mus_per_cluster[" + std::to_string(i) +
                       "]: must lie in [1, carriers per cluster]");
  }
  for (std::size_t i = 0; i < c.sweep.alphas.size(); ++i)
    if (!(c.sweep.alphas[i] > 0.0))
      errors.push_back("sweep.alphas[" + std::to_string(i) + "]: must be > 0");
  for (std::size_t i = 0; i < c.sweep.algorithms.size(); ++i) {
    const auto& a = c.sweep.algorithms[i];
    if (a != "baseline") {
      check(errors, "sweep.algorithms[" + std::to_string(i) + "]",
            [&] { learning::algorithm_from_string(a); });
    }
  }
  if (c.output_dir.empty()) errors.push_back("output_dir: must not be empty");
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

SimConfig validate_config(const std::string& raw, const std::vector<std::string>& overrides) {
  json user = json::parse(raw, nullptr, false, true);
  if (user.is_discarded()) throw ConfigError({"config: not valid JSON"});
  if (!user.is_object()) throw ConfigError({"config: top level must be an object"});
  for (const auto& o : overrides) apply_override(user, o);

  std::string preset = "table2";
  if (auto it = user.find("preset"); it != user.end()) {
    if (!it->is_string()) throw ConfigError({"preset: must be a string"});
    preset = it->get<std::string>();
  }
  json doc = preset_json(preset);
  doc.merge_patch(user);
  // merge_patch drops nulls; an explicit null n_colors means "from layout".
  if (!doc.contains("n_colors")) doc["n_colors"] = nullptr;
  return config_from_json(doc);
}

std::string config_hash(const SimConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace hfl::sim
