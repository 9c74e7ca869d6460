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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "hfl/sim.hpp"
#include "json.hpp"

namespace sim = hfl::sim;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> errors_of(const std::string& raw, const std::vector<std::string>& sets = {}) {
  try {
    sim::validate_config(raw, sets);
  } catch (const sim::ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  for (const auto& e : errors)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("table2 preset") {
  const auto c = sim::validate_config("{}");
  CHECK(c.preset == "table2");
  CHECK(c.radio.n_subcarriers == 600);
  CHECK(c.radio.alpha == 2.8);
  CHECK(c.radio.ber == 1e-3);
  CHECK(c.radio.subcarrier_spacing == 30e3);
  CHECK(c.radio.p_mbs == 20.0);
  CHECK(c.radio.p_sbs == 6.3);
  CHECK(c.radio.p_mu == 0.2);
  CHECK(c.layout.n_clusters == 7);
  CHECK(c.layout.mus_per_cluster == 4);
  CHECK(c.sparsity.phi_ul_mu == 0.99);
  CHECK(c.sparsity.phi_dl_mbs == 0.9);
  CHECK(sim::validate_config(R"({"preset": "text"})").radio.n_subcarriers == 300);
  CHECK(sim::preset_names() == std::vector<std::string>{"table2", "text"});
}

TEST_CASE("config errors carry field paths") {
  CHECK(mentions(errors_of(R"({"radio": {"ber": 0}})"), "radio"));
  CHECK(mentions(errors_of(R"({"radio": {"bogus": 1}})"), "radio.bogus"));
  CHECK(mentions(errors_of(R"({"colour": 1})"), "colour"));
  CHECK(mentions(errors_of(R"({"preset": "nope"})"), "preset"));
  CHECK(mentions(errors_of(R"({"experiment": "nope"})"), "experiment"));
  CHECK(mentions(errors_of(R"({"layout": {"n_clusters": "seven"}})"), "layout.n_clusters"));
  CHECK_FALSE(errors_of("{not json").empty());

  const auto many = errors_of(R"({"radio": {"ber": 0, "bogus": 1}, "sweep": {"periods": [0]}, "x": 1})");
  CHECK(many.size() >= 3);
  CHECK(mentions(many, "sweep"));
}

TEST_CASE("overrides") {
  const auto c = sim::validate_config(R"({"radio": {"alpha": 3.0}})",
                                      {"radio.alpha=3.2", "seed=9", "output_dir=/tmp/x",
                                       "sweep.periods=[1,3]", "n_colors=2"});
  CHECK(c.radio.alpha == 3.2);
  CHECK(c.seed == 9);
  CHECK(c.layout.seed == 9);
  CHECK(c.training.train.seed == 9);
  CHECK(c.output_dir == "/tmp/x");
  CHECK(c.sweep.periods == std::vector<std::size_t>{1, 3});
  CHECK(c.n_colors == 2u);
  CHECK(mentions(errors_of("{}", {"noequals"}), "key=value"));
  CHECK(mentions(errors_of("{}", {"radio.nope=1"}), "radio.nope"));
}

TEST_CASE("config json round trip and hash") {
  const auto a = sim::validate_config(R"({"preset": "text", "seed": 4})");
  const auto b = sim::config_from_json(sim::to_json(a));
  CHECK(sim::to_json(b) == sim::to_json(a));
  CHECK(sim::config_hash(a) == sim::config_hash(b));
  CHECK(sim::config_hash(a).size() == 16);
  CHECK(sim::config_hash(a) != sim::config_hash(sim::validate_config(R"({"preset": "text", "seed": 5})")));
}

TEST_CASE("csv formatting") {
  sim::Table t{{"a", "b"}, {{"1", "x,y"}, {"say \"hi\"", "line\nbreak"}}};
  CHECK(sim::to_csv(t) == "a,b\r\n1,\"x,y\"\r\n\"say \"\"hi\"\"\",\"line\nbreak\"\r\n");
  CHECK(sim::format_number(0.1) == "0.1");
  CHECK(sim::format_number(2.0) == "2");
  CHECK(std::stod(sim::format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("speedup sweep report") {
  auto c = sim::validate_config("{}", {"latency.mc_replicas=4"});
  const auto r = sim::run_experiment(c);
  CHECK(r.table.columns ==
        std::vector<std::string>{"mus_per_cluster", "period", "alpha", "n_colors", "t_fl", "gamma_hfl",
                                 "speedup"});
  REQUIRE(r.table.rows.size() == 9);
  for (const auto& row : r.table.rows) CHECK(std::stod(row[6]) > 1.0);
  CHECK(r.manifest.at("rows") == 9);
  CHECK(r.manifest.at("seed") == 1);
  CHECK(r.manifest.at("config_hash") == sim::config_hash(c));
  CHECK(sim::config_from_json(r.manifest.at("config")).seed == c.seed);

  const auto dir = (std::filesystem::temp_directory_path() / "hfl_sim_test").string();
  std::filesystem::remove_all(dir);
  const auto path = sim::write_report(r, dir, c.experiment);
  const auto first = slurp(path);
  CHECK(first == sim::to_csv(r.table));
  CHECK(json::parse(slurp(dir + "/latency_speedup_vs_mus.manifest.json")) == r.manifest);
  sim::write_report(sim::run_experiment(c), dir, c.experiment);
  CHECK(slurp(path) == first);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);

  CHECK_THROWS(sim::write_report(r, "/proc/hfl_sim_unwritable", c.experiment));
}

TEST_CASE("training report") {
  auto c = sim::validate_config(R"({"experiment": "training_run"})",
                                {"training.epochs=2", "training.dataset.n_train=2800",
                                 "training.dataset.n_test=200", "sweep.periods=[2]",
                                 "sweep.algorithms=[\"baseline\",\"fl\",\"sparse_hfl\"]"});
  const auto r = sim::run_experiment(c);
  CHECK(r.table.columns.front() == "algorithm");
  CHECK(r.table.rows.size() == 3 * 2);
  CHECK(sim::to_csv(r.table) == sim::to_csv(sim::run_experiment(c).table));
}
