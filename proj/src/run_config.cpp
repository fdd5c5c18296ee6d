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

#include "aircast/run_config.hpp"

#include <fstream>
#include <set>

#include "aircast/normalize.hpp"
#include "json.hpp"

using nlohmann::json;

namespace aircast {

namespace {

// Rejects keys outside `allowed`, reporting the JSON path.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  AIRCAST_CHECK(j.is_object(), ConfigError, "expected an object at " + path);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key at " + path + "/" + key);
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ModelConfig RunConfig::model_config() const {
  ModelConfig cfg;
  cfg.in_channels = fused_channels;
  cfg.out_channels = catalog.n_pollutants();
  cfg.base_width = base_width;
  cfg.n_hidden_blocks = n_hidden_blocks;
  cfg.hidden_kernel = hidden_kernel;
  cfg.mlp_expansion = mlp_expansion;
  cfg.time_embed_dim = time_embed_dim;
  cfg.angular_factor = angular_factor;
  return cfg;
}

FusionConfig RunConfig::fusion_config() const {
  return fusion_config_for(catalog, fusion_hidden_width, fused_channels, receptive_field);
}

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.world = WorldConfig::verification_default(/*seed=*/0, /*n_steps=*/100);
  cfg.world.grid = cfg.grid;
  cfg.world.catalog = cfg.catalog;
  cfg.skew_vars = {"plume"};
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  AIRCAST_CHECK(in.good(), ArgumentError, "cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }

  RunConfig cfg = defaults();
  check_keys(j, {"grid", "catalog", "greyline_vars", "skew_vars", "world", "model", "train",
                 "paths"},
             "");

  if (j.contains("grid")) {
    const auto& jg = j.at("grid");
    check_keys(jg, {"n_lat", "n_lon"}, "/grid");
    int n_lat = cfg.grid.n_lat, n_lon = cfg.grid.n_lon;
    get_if(jg, "n_lat", n_lat);
    get_if(jg, "n_lon", n_lon);
    cfg.grid = GridSpec(n_lat, n_lon);
  }

  if (j.contains("catalog")) {
    cfg.catalog_preset = j.at("catalog").get<std::string>();
    if (cfg.catalog_preset == "synthetic")
      cfg.catalog = VariableCatalog::synthetic_default();
    else if (cfg.catalog_preset == "cams")
      cfg.catalog = VariableCatalog::cams_default();
    else
      throw ConfigError("unknown catalog preset at /catalog: " + cfg.catalog_preset);
  }
  if (j.contains("greyline_vars"))
    cfg.catalog.greyline_vars = j.at("greyline_vars").get<std::vector<std::string>>();
  cfg.catalog.validate();

  cfg.skew_vars = default_skew_vars(cfg.catalog);
  if (cfg.catalog_preset == "synthetic") cfg.skew_vars = {"plume"};
  if (j.contains("skew_vars")) cfg.skew_vars = j.at("skew_vars").get<std::vector<std::string>>();

  cfg.world = WorldConfig::verification_default(0, 100);
  cfg.world.grid = cfg.grid;
  cfg.world.catalog = cfg.catalog;
  if (cfg.catalog_preset != "synthetic") {
    cfg.world.sources.clear();
    cfg.world.photo_vars.clear();
    cfg.world.decay_rate.assign(static_cast<std::size_t>(cfg.catalog.n_pollutants()), 0.01);
  }
  if (j.contains("world")) {
    const auto& jw = j.at("world");
    check_keys(jw,
               {"n_steps", "seed", "start_time", "wind_regime", "mean_zonal_speed", "gust_speed",
                "gust_persistence", "diffusion_coeff", "decay_rate", "sources", "photo_vars",
                "photo_production", "photo_decay"},
               "/world");
    get_if(jw, "n_steps", cfg.world.n_steps);
    get_if(jw, "seed", cfg.world.seed);
    if (jw.contains("start_time"))
      cfg.world.start_time = iso_to_utc(jw.at("start_time").get<std::string>());
    if (jw.contains("wind_regime"))
      cfg.world.wind_regime = wind_regime_from_string(jw.at("wind_regime").get<std::string>());
    get_if(jw, "mean_zonal_speed", cfg.world.mean_zonal_speed);
    get_if(jw, "gust_speed", cfg.world.gust_speed);
    get_if(jw, "gust_persistence", cfg.world.gust_persistence);
    get_if(jw, "diffusion_coeff", cfg.world.diffusion_coeff);
    if (jw.contains("decay_rate")) {
      const auto& jd = jw.at("decay_rate");
      AIRCAST_CHECK(jd.is_object(), ConfigError, "expected an object at /world/decay_rate");
      cfg.world.decay_rate.assign(static_cast<std::size_t>(cfg.catalog.n_pollutants()), 0.0);
      for (const auto& [var, rate] : jd.items())
        cfg.world.decay_rate[static_cast<std::size_t>(cfg.catalog.pollutant_index(var))] =
            rate.get<double>();
    }
    if (jw.contains("photo_vars"))
      cfg.world.photo_vars = jw.at("photo_vars").get<std::vector<std::string>>();
    get_if(jw, "photo_production", cfg.world.photo_production);
    get_if(jw, "photo_decay", cfg.world.photo_decay);
    if (jw.contains("sources")) {
      cfg.world.sources.clear();
      int idx = 0;
      for (const auto& js : jw.at("sources")) {
        check_keys(js, {"variable", "lat", "lon", "strength", "sigma_cells"},
                   "/world/sources[" + std::to_string(idx) + "]");
        PointSource s;
        s.variable = js.at("variable").get<std::string>();
        s.lat_deg = js.at("lat").get<double>();
        s.lon_deg = js.at("lon").get<double>();
        s.strength = js.at("strength").get<double>();
        get_if(js, "sigma_cells", s.sigma_cells);
        cfg.world.sources.push_back(std::move(s));
        ++idx;
      }
    }
  }
  cfg.world.validate();

  if (j.contains("model")) {
    const auto& jm = j.at("model");
    check_keys(jm,
               {"base_width", "n_hidden_blocks", "hidden_kernel", "mlp_expansion",
                "time_embed_dim", "angular_factor", "fusion_hidden_width", "fused_channels",
                "receptive_field"},
               "/model");
    get_if(jm, "base_width", cfg.base_width);
    get_if(jm, "n_hidden_blocks", cfg.n_hidden_blocks);
    get_if(jm, "hidden_kernel", cfg.hidden_kernel);
    get_if(jm, "mlp_expansion", cfg.mlp_expansion);
    get_if(jm, "time_embed_dim", cfg.time_embed_dim);
    get_if(jm, "angular_factor", cfg.angular_factor);
    get_if(jm, "fusion_hidden_width", cfg.fusion_hidden_width);
    get_if(jm, "fused_channels", cfg.fused_channels);
    get_if(jm, "receptive_field", cfg.receptive_field);
  }
  cfg.model_config().validate();
  cfg.fusion_config().validate();

  if (j.contains("train")) {
    const auto& jt = j.at("train");
    check_keys(jt,
               {"stage", "max_lr", "lr_start", "lr_floor", "epochs", "rollout_steps",
                "batch_size", "adam_beta1", "adam_beta2", "adam_eps", "weight_decay", "seed",
                "t_begin", "t_end"},
               "/train");
    if (jt.contains("stage"))
      cfg.train.stage = train_stage_from_string(jt.at("stage").get<std::string>());
    get_if(jt, "max_lr", cfg.train.max_lr);
    get_if(jt, "lr_start", cfg.train.lr_start);
    get_if(jt, "lr_floor", cfg.train.lr_floor);
    get_if(jt, "epochs", cfg.train.epochs);
    get_if(jt, "rollout_steps", cfg.train.rollout_steps);
    get_if(jt, "batch_size", cfg.train.batch_size);
    get_if(jt, "adam_beta1", cfg.train.adam_beta1);
    get_if(jt, "adam_beta2", cfg.train.adam_beta2);
    get_if(jt, "adam_eps", cfg.train.adam_eps);
    get_if(jt, "weight_decay", cfg.train.weight_decay);
    get_if(jt, "seed", cfg.train.seed);
    get_if(jt, "t_begin", cfg.train.t_begin);
    get_if(jt, "t_end", cfg.train.t_end);
  }
  cfg.train.validate();

  if (j.contains("paths")) {
    const auto& jp = j.at("paths");
    check_keys(jp, {"pack", "stats", "checkpoint", "metrics", "forecast"}, "/paths");
    get_if(jp, "pack", cfg.pack_path);
    get_if(jp, "stats", cfg.stats_path);
    get_if(jp, "checkpoint", cfg.checkpoint_path);
    get_if(jp, "metrics", cfg.metrics_path);
    get_if(jp, "forecast", cfg.forecast_path);
  }
  return cfg;
}

std::string RunConfig::to_json() const {
  json sources = json::array();
  for (const auto& s : world.sources)
    sources.push_back(json{{"variable", s.variable},
                           {"lat", s.lat_deg},
                           {"lon", s.lon_deg},
                           {"strength", s.strength},
                           {"sigma_cells", s.sigma_cells}});
  json decay = json::object();
  for (int c = 0; c < catalog.n_pollutants(); ++c)
    decay[catalog.pollutant_vars[static_cast<std::size_t>(c)]] =
        world.decay_rate[static_cast<std::size_t>(c)];

  json j{
      {"grid", {{"n_lat", grid.n_lat}, {"n_lon", grid.n_lon}}},
      {"catalog", catalog_preset},
      {"greyline_vars", catalog.greyline_vars},
      {"skew_vars", skew_vars},
      {"world",
       {{"n_steps", world.n_steps},
        {"seed", world.seed},
        {"start_time", utc_to_iso(world.start_time)},
        {"wind_regime", to_string(world.wind_regime)},
        {"mean_zonal_speed", world.mean_zonal_speed},
        {"gust_speed", world.gust_speed},
        {"gust_persistence", world.gust_persistence},
        {"diffusion_coeff", world.diffusion_coeff},
        {"decay_rate", decay},
        {"sources", sources},
        {"photo_vars", world.photo_vars},
        {"photo_production", world.photo_production},
        {"photo_decay", world.photo_decay}}},
      {"model",
       {{"base_width", base_width},
        {"n_hidden_blocks", n_hidden_blocks},
        {"hidden_kernel", hidden_kernel},
        {"mlp_expansion", mlp_expansion},
        {"time_embed_dim", time_embed_dim},
        {"angular_factor", angular_factor},
        {"fusion_hidden_width", fusion_hidden_width},
        {"fused_channels", fused_channels},
        {"receptive_field", receptive_field}}},
      {"train",
       {{"stage", to_string(train.stage)},
        {"max_lr", train.max_lr},
        {"lr_start", train.lr_start},
        {"lr_floor", train.lr_floor},
        {"epochs", train.epochs},
        {"rollout_steps", train.rollout_steps},
        {"batch_size", train.batch_size},
        {"adam_beta1", train.adam_beta1},
        {"adam_beta2", train.adam_beta2},
        {"adam_eps", train.adam_eps},
        {"weight_decay", train.weight_decay},
        {"seed", train.seed},
        {"t_begin", train.t_begin},
        {"t_end", train.t_end}}},
      {"paths",
       {{"pack", pack_path},
        {"stats", stats_path},
        {"checkpoint", checkpoint_path},
        {"metrics", metrics_path},
        {"forecast", forecast_path}}}};
  return j.dump(2);
}

}  // namespace aircast
