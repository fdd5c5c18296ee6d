/* Copyright (c) 2026 Aircast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include <cstdlib>
#include <fstream>

#include "aircast/dataio.hpp"
#include "aircast/evaluate.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace aircast;
using aircast::testing::TempDir;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(AIRCAST_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

// A configuration small enough for a seconds-scale end-to-end run.
void write_tiny_config(const std::string& path, const TempDir& tmp) {
  std::ofstream out(path);
  out << R"({
  "grid": {"n_lat": 16, "n_lon": 30},
  "world": {"n_steps": 24, "seed": 5, "gust_speed": 0.7},
  "model": {
    "base_width": 4, "n_hidden_blocks": 1, "hidden_kernel": 5,
    "time_embed_dim": 8, "fusion_hidden_width": 8, "fused_channels": 6
  },
  "train": {"stage": "pretrain", "epochs": 1, "max_lr": 1e-3, "seed": 3},
  "paths": {
    "pack": ")" << tmp.sub("world") << R"(",
    "stats": ")" << tmp.sub("stats.json") << R"(",
    "checkpoint": ")" << tmp.sub("model.ckpt") << R"(",
    "metrics": ")" << tmp.sub("metrics.jsonl") << R"(",
    "forecast": ")" << tmp.sub("forecast") << R"("
  }
})";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("end-to-end pipeline: gen-data, stats, train, forecast, evaluate, scorecard") {
  TempDir tmp("cli-e2e");
  const std::string config = tmp.sub("config.json");
  write_tiny_config(config, tmp);
  const std::string cfg_arg = "--config " + config;

  REQUIRE(run("dump-config " + cfg_arg) == 0);
  REQUIRE(run("gen-data " + cfg_arg) == 0);
  REQUIRE(run("stats " + cfg_arg) == 0);
  REQUIRE(run("train " + cfg_arg) == 0);
  REQUIRE(run("forecast " + cfg_arg + " --init-index 12 --steps 10 --out " +
              tmp.sub("forecast")) == 0);

  // Ten lead-time records, as requested.
  const GridPack fc = GridPack::open(tmp.sub("forecast"));
  CHECK(fc.n_times() == 10);

  REQUIRE(run("evaluate --truth " + tmp.sub("world") + " --forecast " + tmp.sub("forecast") +
              " --out " + tmp.sub("report.json")) == 0);

  // Evaluating a pack against itself gives an all-zero report.
  REQUIRE(run("evaluate --truth " + tmp.sub("forecast") + " --forecast " + tmp.sub("forecast") +
              " --out " + tmp.sub("self.json")) == 0);
  const EvalReport self = EvalReport::load(tmp.sub("self.json"));
  for (const auto& [var, leads] : self.values)
    for (const auto& [lead, v] : leads) CHECK(v == 0.0);

  REQUIRE(run("scorecard --report " + tmp.sub("report.json") + " --baseline " +
              tmp.sub("report.json") + " --csv " + tmp.sub("card.csv") + " --ppm " +
              tmp.sub("card.ppm")) == 0);
  const Scorecard card = parse_scorecard_csv(tmp.sub("card.csv"));
  for (const auto& row : card.cells)
    for (double v : row) CHECK(v == 1.0);

  REQUIRE(run("export-map --pack " + tmp.sub("world") +
              " --time-index 3 --variable plume --bbox 0 60 0 120 --csv " +
              tmp.sub("map.csv")) == 0);
  CHECK(std::filesystem::exists(tmp.sub("map.csv")));
}

TEST_CASE("schema violations exit 2 with the offending path") {
  TempDir tmp("cli-schema");
  const std::string config = tmp.sub("bad.json");
  {
    std::ofstream out(config);
    out << R"({"world": {"wibble": 3}})";
  }
  CHECK(run("dump-config --config " + config) == 2);
}

TEST_CASE("missing inputs exit 3") {
  TempDir tmp("cli-missing");
  CHECK(run("stats --pack " + tmp.sub("nonexistent")) == 3);
  CHECK(run("evaluate --truth " + tmp.sub("nope") + " --forecast " + tmp.sub("nope2")) == 3);
}

TEST_CASE("deterministic artifacts under a fixed seed") {
  TempDir tmp("cli-seed");
  const std::string config = tmp.sub("config.json");
  write_tiny_config(config, tmp);
  REQUIRE(run("gen-data --config " + config + " --out " + tmp.sub("w1")) == 0);
  REQUIRE(run("gen-data --config " + config + " --out " + tmp.sub("w2")) == 0);
  const GridPack a = GridPack::open(tmp.sub("w1"));
  const GridPack b = GridPack::open(tmp.sub("w2"));
  for (int t = 0; t < a.n_times(); ++t)
    CHECK(testing::max_abs_diff(a.pollutants_at(t).values, b.pollutants_at(t).values) == 0.0);
}

}  // TEST_SUITE
