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

#include "aircast/model.hpp"

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace aircast {

namespace {

constexpr char kMagic[8] = {'A', 'I', 'R', 'C', 'K', 'P', 'T', '1'};

json fusion_cfg_to_json(const FusionConfig& c) {
  return json{{"pollutant_channels", c.pollutant_channels},
              {"met_channels", c.met_channels},
              {"hidden_width", c.hidden_width},
              {"fused_channels", c.fused_channels},
              {"receptive_field", c.receptive_field}};
}

FusionConfig fusion_cfg_from_json(const json& j) {
  FusionConfig c;
  c.pollutant_channels = j.at("pollutant_channels").get<int>();
  c.met_channels = j.at("met_channels").get<int>();
  c.hidden_width = j.at("hidden_width").get<int>();
  c.fused_channels = j.at("fused_channels").get<int>();
  c.receptive_field = j.at("receptive_field").get<int>();
  return c;
}

json model_cfg_to_json(const ModelConfig& c) {
  return json{{"in_channels", c.in_channels},
              {"out_channels", c.out_channels},
              {"encoder_depth", c.encoder_depth},
              {"base_width", c.base_width},
              {"width_mult", c.width_mult},
              {"n_hidden_blocks", c.n_hidden_blocks},
              {"hidden_kernel", c.hidden_kernel},
              {"mlp_expansion", c.mlp_expansion},
              {"time_embed_dim", c.time_embed_dim},
              {"angular_factor", c.angular_factor}};
}

ModelConfig model_cfg_from_json(const json& j) {
  ModelConfig c;
  c.in_channels = j.at("in_channels").get<int>();
  c.out_channels = j.at("out_channels").get<int>();
  c.encoder_depth = j.at("encoder_depth").get<int>();
  c.base_width = j.at("base_width").get<int>();
  c.width_mult = j.at("width_mult").get<int>();
  c.n_hidden_blocks = j.at("n_hidden_blocks").get<int>();
  c.hidden_kernel = j.at("hidden_kernel").get<int>();
  c.mlp_expansion = j.at("mlp_expansion").get<int>();
  c.time_embed_dim = j.at("time_embed_dim").get<int>();
  c.angular_factor = j.at("angular_factor").get<double>();
  return c;
}

}  // namespace

FusionConfig fusion_config_for(const VariableCatalog& catalog, int hidden_width,
                               int fused_channels, int receptive_field) {
  FusionConfig cfg;
  cfg.pollutant_channels = 2 * catalog.n_pollutants() + catalog.n_static();
  cfg.met_channels = 2 * catalog.n_met();
  cfg.hidden_width = hidden_width;
  cfg.fused_channels = fused_channels;
  cfg.receptive_field = receptive_field;
  return cfg;
}

CoupledModel::CoupledModel(const FusionConfig& fusion_cfg, const ModelConfig& unet_cfg,
                           NormStats stats, std::uint64_t seed)
    : fusion_cfg_(fusion_cfg),
      unet_cfg_(unet_cfg),
      stats_(std::move(stats)),
      fusion_([&] {
        Rng rng(seed);
        Rng frng = rng.fork(101);
        return FusionParams::init(fusion_cfg_, frng);
      }()),
      unet_([&] {
        Rng rng(seed);
        Rng urng = rng.fork(102);
        return UNet(unet_cfg_, urng);
      }()) {
  AIRCAST_CHECK(fusion_cfg_.fused_channels == unet_cfg_.in_channels, ConfigError,
                "fused width must equal backbone input width");
}

std::pair<ad::Var, ad::Var> CoupledModel::predict(const ad::Var& p_in, const ad::Var& q_in,
                                                  UtcTime initial_time) const {
  const int h = p_in->value.dim(0), w = p_in->value.dim(1);
  const ad::Var fused = fuse_field_graph(p_in, q_in, fusion_);

  const int mult = unet_cfg_.pad_multiple();
  const int hp = (h + mult - 1) / mult * mult;
  const int wp = (w + mult - 1) / mult * mult;
  ad::Var x = (hp == h && wp == w) ? fused : ad::pad_spatial(fused, hp, wp);

  const Tensor emb = time_embed(initial_time, unet_cfg_.angular_factor);
  auto [psi, delta] = unet_.forward(x, emb);
  if (hp != h || wp != w) {
    psi = ad::crop_spatial(psi, h, w);
    delta = ad::crop_spatial(delta, h, w);
  }
  return {psi, delta};
}

std::vector<std::pair<std::string, ad::Var>> CoupledModel::named_params() const {
  auto out = fusion_.named_params();
  for (auto& p : unet_.named_params()) out.push_back(std::move(p));
  return out;
}

std::int64_t CoupledModel::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& [name, v] : named_params()) n += v->value.size();
  return n;
}

std::int64_t count_parameters_total(const FusionConfig& fusion_cfg, const ModelConfig& unet_cfg) {
  const int r2 = fusion_cfg.receptive_field * fusion_cfg.receptive_field;
  std::int64_t n = count_parameters(unet_cfg);
  n += static_cast<std::int64_t>(r2) * fusion_cfg.pollutant_channels * fusion_cfg.hidden_width;
  n += static_cast<std::int64_t>(r2) * fusion_cfg.met_channels * fusion_cfg.hidden_width;
  n += static_cast<std::int64_t>(fusion_cfg.hidden_width) * fusion_cfg.fused_channels;
  return n;
}

void CoupledModel::save_checkpoint(const std::string& path) const {
  json params = json::array();
  const auto named = named_params();
  for (const auto& [name, v] : named)
    params.push_back(json{{"name", name}, {"shape", v->value.shape()}});

  json header{{"format", "aircast-checkpoint"},
              {"version", 1},
              {"fusion", fusion_cfg_to_json(fusion_cfg_)},
              {"model", model_cfg_to_json(unet_cfg_)},
              {"norm_stats", json::parse(stats_.to_json())},
              {"params", params}};
  const std::string header_text = header.dump();

  const fs::path target(path);
  if (!target.parent_path().empty()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    AIRCAST_CHECK(out.good(), IntegrityError, "cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = header_text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_text.data(), static_cast<std::streamsize>(len));
    for (const auto& [name, v] : named) {
      out.write(reinterpret_cast<const char*>(v->value.data()),
                static_cast<std::streamsize>(v->value.size() * sizeof(double)));
    }
    AIRCAST_CHECK(out.good(), IntegrityError, "short checkpoint write: " + path);
  }
  fs::rename(tmp, target);
}

CoupledModel CoupledModel::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  AIRCAST_CHECK(in.good(), IntegrityError, "cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  AIRCAST_CHECK(in.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0, FormatError,
                "not an aircast checkpoint: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_text(len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(len));
  AIRCAST_CHECK(in.good(), IntegrityError, "truncated checkpoint header: " + path);

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw FormatError("bad checkpoint header: " + std::string(e.what()));
  }
  AIRCAST_CHECK(header.value("version", 0) == 1, FormatError, "unsupported checkpoint version");

  CoupledModel model(fusion_cfg_from_json(header.at("fusion")),
                     model_cfg_from_json(header.at("model")),
                     NormStats::from_json(header.at("norm_stats").dump()), /*seed=*/0);

  auto named = model.named_params();
  const auto& jparams = header.at("params");
  AIRCAST_CHECK(jparams.size() == named.size(), FormatError,
                "checkpoint parameter manifest does not match the model");
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& jp = jparams[i];
    AIRCAST_CHECK(jp.at("name").get<std::string>() == named[i].first, FormatError,
                  "checkpoint parameter order mismatch at " + named[i].first);
    Tensor& t = named[i].second->value;
    AIRCAST_CHECK(jp.at("shape").get<std::vector<int>>() == t.shape(), FormatError,
                  "checkpoint shape mismatch at " + named[i].first);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    AIRCAST_CHECK(in.gcount() == static_cast<std::streamsize>(t.size() * sizeof(double)),
                  IntegrityError, "truncated checkpoint data at " + named[i].first);
  }
  return model;
}

}  // namespace aircast
