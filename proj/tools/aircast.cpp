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

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "aircast/evaluate.hpp"
#include "aircast/run_config.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace aircast;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg =
      args.config_path.empty() ? RunConfig::defaults() : RunConfig::from_file(args.config_path);
  if (args.seed) {
    cfg.world.seed = *args.seed;
    cfg.train.seed = *args.seed;
  }
  return cfg;
}

// Stats fitting range: the training split when configured, else everything.
std::pair<int, int> stats_range(const RunConfig& cfg, const GridPack& pack) {
  const int lo = cfg.train.t_begin >= 0 ? cfg.train.t_begin : 0;
  const int hi = cfg.train.t_end >= 0 ? std::min(cfg.train.t_end, pack.n_times())
                                      : pack.n_times();
  return {std::max(0, lo - 1), hi};  // include the history step feeding the first window
}

int cmd_gen_data(const CommonArgs& common, const std::string& out_override) {
  RunConfig cfg = load_config(common);
  const std::string out = out_override.empty() ? cfg.pack_path : out_override;
  const PackData data = generate_world(cfg.world);
  write_pack(data, out);
  std::cout << "wrote pack: " << out << " (" << data.times.size() << " times)\n";
  return 0;
}

int cmd_stats(const CommonArgs& common, const std::string& pack_override,
              const std::string& out_override) {
  RunConfig cfg = load_config(common);
  const std::string pack_path = pack_override.empty() ? cfg.pack_path : pack_override;
  const std::string out = out_override.empty() ? cfg.stats_path : out_override;
  const GridPack pack = GridPack::open(pack_path);
  const auto [lo, hi] = stats_range(cfg, pack);
  NormStats stats = fit_norm_stats(pack, lo, hi, cfg.skew_vars);
  if (!fs::path(out).parent_path().empty()) fs::create_directories(fs::path(out).parent_path());
  stats.save(out);
  std::cout << "wrote stats: " << out << " (fit on times [" << lo << ", " << hi << "))\n";
  return 0;
}

int cmd_train(const CommonArgs& common, const std::string& stage_override,
              const std::string& init_from, const std::string& pack_override,
              const std::string& stats_override, const std::string& ckpt_override,
              const std::string& metrics_override) {
  RunConfig cfg = load_config(common);
  if (!stage_override.empty()) cfg.train.stage = train_stage_from_string(stage_override);
  const std::string pack_path = pack_override.empty() ? cfg.pack_path : pack_override;
  const std::string ckpt = ckpt_override.empty() ? cfg.checkpoint_path : ckpt_override;
  const std::string metrics = metrics_override.empty() ? cfg.metrics_path : metrics_override;

  const GridPack pack = GridPack::open(pack_path);
  std::optional<CoupledModel> model;
  if (!init_from.empty()) {
    model.emplace(CoupledModel::load_checkpoint(init_from));
  } else {
    const std::string stats_path = stats_override.empty() ? cfg.stats_path : stats_override;
    NormStats stats = NormStats::load(stats_path);
    model.emplace(cfg.fusion_config(), cfg.model_config(), std::move(stats), cfg.train.seed);
  }

  if (!fs::path(ckpt).parent_path().empty()) fs::create_directories(fs::path(ckpt).parent_path());
  if (!fs::path(metrics).parent_path().empty())
    fs::create_directories(fs::path(metrics).parent_path());

  const TrainResult result = train_stage(pack, cfg.train, *model, ckpt, metrics);
  std::cout << "stage " << to_string(cfg.train.stage) << ": " << result.iterations
            << " iterations, final epoch loss " << result.epoch_loss.back() << "\n";
  std::cout << "wrote checkpoint: " << ckpt << "\n";
  return 0;
}

int cmd_forecast(const CommonArgs& common, const std::string& ckpt_override,
                 const std::string& pack_override, int init_index, const std::string& init_time,
                 int steps, const std::string& out_override) {
  RunConfig cfg = load_config(common);
  const std::string pack_path = pack_override.empty() ? cfg.pack_path : pack_override;
  const std::string ckpt = ckpt_override.empty() ? cfg.checkpoint_path : ckpt_override;
  const std::string out = out_override.empty() ? cfg.forecast_path : out_override;

  const GridPack pack = GridPack::open(pack_path);
  const CoupledModel model = CoupledModel::load_checkpoint(ckpt);
  const auto& catalog = pack.manifest().catalog;

  if (!init_time.empty()) {
    const UtcTime t = iso_to_utc(init_time);
    const auto& times = pack.manifest().times;
    const auto it = std::find(times.begin(), times.end(), t);
    AIRCAST_CHECK(it != times.end(), ArgumentError, "init time not in pack: " + init_time);
    init_index = static_cast<int>(it - times.begin());
  }
  AIRCAST_CHECK(init_index >= 1, ArgumentError, "init index needs one step of history");
  AIRCAST_CHECK(init_index + steps < pack.n_times(), ArgumentError,
                "pack does not cover " + std::to_string(steps) + " steps of meteorology");

  const FieldTensor p_prev = pack.pollutants_at(init_index - 1);
  const FieldTensor p_init = pack.pollutants_at(init_index);
  const FieldTensor q_init = pack.meteorology_at(init_index);
  std::vector<FieldTensor> met_seq;
  for (int k = 1; k <= steps; ++k) met_seq.push_back(pack.meteorology_at(init_index + k));

  const ForecastResult result = rollout(model, catalog, p_prev, p_init, q_init, met_seq,
                                        pack.statics().values, steps);
  write_pack(forecast_to_pack(result, catalog, pack.manifest().grid, q_init, met_seq,
                              pack.statics().values),
             out);
  std::cout << "wrote forecast: " << out << " (" << steps << " lead steps from "
            << utc_to_iso(p_init.valid_time) << ")\n";
  return 0;
}

int cmd_evaluate(const std::string& truth_path, const std::string& forecast_path,
                 const std::string& out) {
  const GridPack truth = GridPack::open(truth_path);
  const GridPack forecast = GridPack::open(forecast_path);
  const EvalReport report = evaluate_forecast_pack(truth, forecast);
  if (out.empty()) {
    std::cout << report.to_json() << "\n";
  } else {
    if (!fs::path(out).parent_path().empty()) fs::create_directories(fs::path(out).parent_path());
    report.save(out);
    std::cout << "wrote report: " << out << "\n";
  }
  return 0;
}

int cmd_scorecard(const std::string& report_path, const std::string& baseline_path,
                  const std::string& csv, const std::string& ppm) {
  const EvalReport model = EvalReport::load(report_path);
  const EvalReport baseline = EvalReport::load(baseline_path);
  const Scorecard card = scorecard(normalized_rmse(model, baseline));
  if (!csv.empty()) {
    if (!fs::path(csv).parent_path().empty()) fs::create_directories(fs::path(csv).parent_path());
    write_scorecard_csv(card, csv);
    std::cout << "wrote scorecard: " << csv << "\n";
  }
  if (!ppm.empty()) {
    write_scorecard_ppm(card, ppm);
    std::cout << "wrote heat map: " << ppm << "\n";
  }
  for (std::size_t d = 0; d < card.lead_days.size(); ++d) {
    std::cout << "day " << card.lead_days[d] << ": "
              << 100.0 * card.better_fraction[d] << "% of variables better than baseline\n";
  }
  return 0;
}

int cmd_export_map(const std::string& pack_path, int time_index, const std::string& variable,
                   const std::vector<double>& bbox_vals, const std::string& csv,
                   const std::string& ppm) {
  const GridPack pack = GridPack::open(pack_path);
  BBox bbox;
  if (!bbox_vals.empty()) {
    AIRCAST_CHECK(bbox_vals.size() == 4, ArgumentError,
                  "--bbox needs lat_min,lat_max,lon_min,lon_max");
    bbox = {bbox_vals[0], bbox_vals[1], bbox_vals[2], bbox_vals[3]};
  }
  const FieldTensor field = pack.pollutants_at(time_index);
  export_map(field, pack.manifest().grid, variable, bbox, csv, ppm);
  std::cout << "wrote map: " << csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aircast: offline meteorology-pollution coupled forecasting"};
  app.require_subcommand(1);

  CommonArgs common;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "JSON run configuration");
    cmd->add_option("--seed", seed_value, "override config seeds")
        ->each([&](const std::string&) { common.seed = seed_value; });
  };

  // gen-data
  std::string out_path;
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic world pack");
  add_common(gen);
  gen->add_option("--out", out_path, "output pack directory");

  // stats
  std::string pack_path, stats_out;
  auto* stats = app.add_subcommand("stats", "fit normalization statistics");
  add_common(stats);
  stats->add_option("--pack", pack_path, "input pack");
  stats->add_option("--out", stats_out, "output stats JSON");

  // train
  std::string stage, init_from, stats_path, ckpt_path, metrics_path;
  auto* train = app.add_subcommand("train", "train one stage");
  add_common(train);
  train->add_option("--stage", stage, "pretrain | finetune | multistep");
  train->add_option("--init-from", init_from, "checkpoint to continue from");
  train->add_option("--pack", pack_path, "input pack");
  train->add_option("--stats", stats_path, "normalization stats JSON");
  train->add_option("--checkpoint", ckpt_path, "output checkpoint");
  train->add_option("--metrics", metrics_path, "metrics JSONL");

  // forecast
  int init_index = 1, steps = 10;
  std::string init_time;
  auto* fc = app.add_subcommand("forecast", "autoregressive rollout from a pack state");
  add_common(fc);
  fc->add_option("--checkpoint", ckpt_path, "model checkpoint");
  fc->add_option("--pack", pack_path, "pack with initial states and meteorology");
  fc->add_option("--init-index", init_index, "initial time index (needs 1 step of history)");
  fc->add_option("--init-time", init_time, "initial time, ISO-8601");
  fc->add_option("--steps", steps, "lead steps (12 h each)");
  fc->add_option("--out", out_path, "output forecast pack");

  // evaluate
  std::string truth_path, forecast_path, report_out;
  auto* ev = app.add_subcommand("evaluate", "score a forecast pack against truth");
  ev->add_option("--truth", truth_path, "truth pack")->required();
  ev->add_option("--forecast", forecast_path, "forecast pack")->required();
  ev->add_option("--out", report_out, "output report JSON (stdout when omitted)");

  // scorecard
  std::string report_path, baseline_path, csv_path, ppm_path;
  auto* sc = app.add_subcommand("scorecard", "normalized-RMSE matrix vs a baseline report");
  sc->add_option("--report", report_path, "model report JSON")->required();
  sc->add_option("--baseline", baseline_path, "baseline report JSON")->required();
  sc->add_option("--csv", csv_path, "output CSV");
  sc->add_option("--ppm", ppm_path, "optional heat-map image");

  // export-map
  int time_index = 0;
  std::string variable;
  std::vector<double> bbox_vals;
  auto* em = app.add_subcommand("export-map", "regional sub-grid as CSV (and optional image)");
  em->add_option("--pack", pack_path, "input pack")->required();
  em->add_option("--time-index", time_index, "time record");
  em->add_option("--variable", variable, "pollutant variable")->required();
  em->add_option("--bbox", bbox_vals, "lat_min lat_max lon_min lon_max")->expected(4);
  em->add_option("--csv", csv_path, "output CSV")->required();
  em->add_option("--ppm", ppm_path, "optional image");

  // dump-config
  auto* dump = app.add_subcommand("dump-config", "print the fully-resolved configuration");
  add_common(dump);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(common, out_path);
    if (stats->parsed()) return cmd_stats(common, pack_path, stats_out);
    if (train->parsed())
      return cmd_train(common, stage, init_from, pack_path, stats_path, ckpt_path, metrics_path);
    if (fc->parsed())
      return cmd_forecast(common, ckpt_path, pack_path, init_index, init_time, steps, out_path);
    if (ev->parsed()) return cmd_evaluate(truth_path, forecast_path, report_out);
    if (sc->parsed()) return cmd_scorecard(report_path, baseline_path, csv_path, ppm_path);
    if (em->parsed())
      return cmd_export_map(pack_path, time_index, variable, bbox_vals, csv_path, ppm_path);
    if (dump->parsed()) {
      std::cout << load_config(common).to_json() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << R"({"error":"config","message":")" << e.what() << "\"}\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << R"({"error":"input","message":")" << e.what() << "\"}\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << R"({"error":"internal","message":")" << e.what() << "\"}\n";
    return 1;
  }
  return 1;
}
