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

#include "aircast/backbone.hpp"

#include <cmath>

namespace aircast {

void ModelConfig::validate() const {
  AIRCAST_CHECK(in_channels > 0 && out_channels > 0, ConfigError,
                "model channel counts must be positive");
  AIRCAST_CHECK(encoder_depth == 4, ConfigError, "backbone uses exactly 4 encoder levels");
  AIRCAST_CHECK(base_width > 0 && width_mult >= 1, ConfigError, "bad width settings");
  AIRCAST_CHECK(n_hidden_blocks >= 0, ConfigError, "n_hidden_blocks must be >= 0");
  AIRCAST_CHECK(hidden_kernel % 2 == 1 && hidden_kernel >= 1, ConfigError,
                "hidden_kernel must be odd");
  AIRCAST_CHECK(mlp_expansion >= 1 && time_embed_dim > 0, ConfigError, "bad block settings");
}

int ModelConfig::width_at(int level) const {
  int w = base_width;
  for (int l = 0; l < level; ++l) w *= width_mult;
  return w;
}

ModelConfig ModelConfig::full_scale_default() {
  ModelConfig cfg;
  cfg.in_channels = 128;
  cfg.out_channels = 73;
  cfg.base_width = 110;
  cfg.n_hidden_blocks = 4;
  cfg.hidden_kernel = 11;
  cfg.mlp_expansion = 2;
  cfg.time_embed_dim = 128;
  return cfg;
}

Tensor TimeEmbedding::embed(UtcTime t) const {
  const double doy = static_cast<double>(day_of_year(t));
  const double hod = hour_of_day(t);
  Tensor e({4});
  e[0] = std::cos(angular_factor * doy / lambda_day);
  e[1] = std::sin(angular_factor * doy / lambda_day);
  e[2] = std::cos(angular_factor * hod / lambda_hour);
  e[3] = std::sin(angular_factor * hod / lambda_hour);
  return e;
}

Tensor time_embed(UtcTime t, double angular_factor) {
  TimeEmbedding emb;
  emb.angular_factor = angular_factor;
  return emb.embed(t);
}

PaddedField pad_to_multiple(const Tensor& field, int multiple) {
  AIRCAST_CHECK(field.ndim() == 3, ShapeError, "pad_to_multiple expects a rank-3 field");
  const int h = field.dim(0), w = field.dim(1);
  const int hp = (h + multiple - 1) / multiple * multiple;
  const int wp = (w + multiple - 1) / multiple * multiple;
  PaddedField out;
  out.orig_h = h;
  out.orig_w = w;
  if (hp == h && wp == w) {
    out.values = field;
  } else {
    ad::NoGradGuard ng;
    out.values = ad::pad_spatial(ad::constant(field), hp, wp)->value;
  }
  return out;
}

Tensor crop_to(const Tensor& field, int h, int w) {
  AIRCAST_CHECK(field.ndim() == 3, ShapeError, "crop_to expects a rank-3 field");
  if (field.dim(0) == h && field.dim(1) == w) return field;
  ad::NoGradGuard ng;
  return ad::crop_spatial(ad::constant(field), h, w)->value;
}

// ---------------------------------------------------------------------------
// Parameter inventory. Names double as checkpoint keys.
// ---------------------------------------------------------------------------
std::vector<std::pair<std::string, std::vector<int>>> parameter_shapes(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::string, std::vector<int>>> shapes;
  auto lin = [&shapes](const std::string& name, int in, int out) {
    shapes.emplace_back(name + ".w", std::vector<int>{in, out});
    shapes.emplace_back(name + ".b", std::vector<int>{out});
  };

  const int depth = cfg.encoder_depth;
  lin("time.embed", 4, cfg.time_embed_dim);
  lin("time.stem", cfg.time_embed_dim, cfg.width_at(0));
  for (int l = 1; l <= depth; ++l)
    lin("time.enc" + std::to_string(l), cfg.time_embed_dim, cfg.width_at(l));
  for (int l = depth; l >= 1; --l)
    lin("time.dec" + std::to_string(l), cfg.time_embed_dim, cfg.width_at(l - 1));

  lin("stem", 9 * cfg.in_channels, cfg.width_at(0));
  for (int l = 1; l <= depth; ++l) {
    const std::string enc = "enc" + std::to_string(l);
    lin(enc + ".down", 9 * cfg.width_at(l - 1), cfg.width_at(l));
    lin(enc + ".conv", 9 * cfg.width_at(l), cfg.width_at(l));
  }

  const int wb = cfg.width_at(depth);
  for (int b = 0; b < cfg.n_hidden_blocks; ++b) {
    const std::string blk = "block" + std::to_string(b);
    shapes.emplace_back(blk + ".ln1.g", std::vector<int>{wb});
    shapes.emplace_back(blk + ".ln1.b", std::vector<int>{wb});
    lin(blk + ".attn", wb, wb);
    shapes.emplace_back(blk + ".dw.k", std::vector<int>{cfg.hidden_kernel * cfg.hidden_kernel, wb});
    lin(blk + ".value", wb, wb);
    lin(blk + ".proj", wb, wb);
    shapes.emplace_back(blk + ".ln2.g", std::vector<int>{wb});
    shapes.emplace_back(blk + ".ln2.b", std::vector<int>{wb});
    lin(blk + ".mlp1", wb, cfg.mlp_expansion * wb);
    lin(blk + ".mlp2", cfg.mlp_expansion * wb, wb);
  }

  for (int l = depth; l >= 1; --l) {
    const std::string dec = "dec" + std::to_string(l);
    lin(dec + ".up", 9 * cfg.width_at(l), cfg.width_at(l - 1));
    lin(dec + ".conv", 9 * 2 * cfg.width_at(l - 1), cfg.width_at(l - 1));
  }

  lin("head.psi", cfg.width_at(0), cfg.out_channels);
  lin("head.delta", cfg.width_at(0), cfg.out_channels);
  return shapes;
}

std::int64_t count_parameters(const ModelConfig& cfg) {
  std::int64_t n = 0;
  for (const auto& [name, shape] : parameter_shapes(cfg)) n += Tensor::count(shape);
  return n;
}

UNet::UNet(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
  for (const auto& [name, shape] : parameter_shapes(cfg_)) {
    Tensor t(shape);
    const bool is_head = name.rfind("head.", 0) == 0;
    const auto suffix = name.substr(name.size() - 2);
    if (is_head) {
      // Zero heads: psi = exp(0) = 1 and delta = 0, the identity start.
    } else if (suffix == ".w") {
      const double sd = std::sqrt(2.0 / shape[0]);
      for (std::int64_t i = 0; i < t.size(); ++i) t[i] = sd * rng.normal();
    } else if (suffix == ".k") {
      const double sd = 1.0 / cfg_.hidden_kernel;
      for (std::int64_t i = 0; i < t.size(); ++i) t[i] = sd * rng.normal();
    } else if (suffix == ".g") {
      for (std::int64_t i = 0; i < t.size(); ++i) t[i] = 1.0;
    }
    // ".b" biases and LN offsets stay zero.
    params_.emplace(name, ad::make_param(std::move(t)));
  }
}

const ad::Var& UNet::param(const std::string& name) const {
  auto it = params_.find(name);
  AIRCAST_CHECK(it != params_.end(), ArgumentError, "unknown parameter: " + name);
  return it->second;
}

std::vector<std::pair<std::string, ad::Var>> UNet::named_params() const {
  std::vector<std::pair<std::string, ad::Var>> out;
  out.reserve(params_.size());
  for (const auto& [name, v] : params_) out.emplace_back(name, v);
  return out;
}

ad::Var UNet::conv(const ad::Var& x, const std::string& name, int kernel, int stride) const {
  return ad::add_channel_bias(ad::linear(ad::im2col(x, kernel, stride), param(name + ".w")),
                              param(name + ".b"));
}

ad::Var UNet::time_bias(const ad::Var& x, const ad::Var& time_hidden,
                        const std::string& site) const {
  const ad::Var proj = ad::add_channel_bias(ad::linear(time_hidden, param(site + ".w")),
                                            param(site + ".b"));
  return ad::add_channel_bias(x, proj);
}

ad::Var UNet::modulation_block(const ad::Var& x, const std::string& prefix) const {
  // Gated large-kernel branch with residual, then a feed-forward sublayer.
  ad::Var h = ad::layer_norm_channels(x, param(prefix + ".ln1.g"), param(prefix + ".ln1.b"));
  ad::Var a = ad::add_channel_bias(ad::linear(h, param(prefix + ".attn.w")),
                                   param(prefix + ".attn.b"));
  a = ad::depthwise_conv(a, param(prefix + ".dw.k"), cfg_.hidden_kernel);
  ad::Var v = ad::add_channel_bias(ad::linear(h, param(prefix + ".value.w")),
                                   param(prefix + ".value.b"));
  ad::Var gated = ad::mul(a, v);
  ad::Var out = ad::add_channel_bias(ad::linear(gated, param(prefix + ".proj.w")),
                                     param(prefix + ".proj.b"));
  ad::Var y = ad::add(x, out);

  ad::Var h2 = ad::layer_norm_channels(y, param(prefix + ".ln2.g"), param(prefix + ".ln2.b"));
  ad::Var f = ad::gelu(ad::add_channel_bias(ad::linear(h2, param(prefix + ".mlp1.w")),
                                            param(prefix + ".mlp1.b")));
  f = ad::add_channel_bias(ad::linear(f, param(prefix + ".mlp2.w")), param(prefix + ".mlp2.b"));
  return ad::add(y, f);
}

std::pair<ad::Var, ad::Var> UNet::forward(const ad::Var& x, const Tensor& emb4) const {
  AIRCAST_CHECK(x->value.ndim() == 3 && x->value.dim(2) == cfg_.in_channels, ShapeError,
                "backbone input has wrong channel count");
  const int mult = cfg_.pad_multiple();
  AIRCAST_CHECK(x->value.dim(0) % mult == 0 && x->value.dim(1) % mult == 0, ShapeError,
                "backbone input spatial dims must be padded to a multiple of " +
                    std::to_string(mult));
  AIRCAST_CHECK(emb4.size() == 4, ShapeError, "time embedding must have 4 entries");

  const ad::Var time_hidden = ad::gelu(ad::add_channel_bias(
      ad::linear(ad::constant(emb4.reshaped({1, 4})), param("time.embed.w")),
      param("time.embed.b")));

  // Encoder; skips[l] is the level-l output at width width_at(l).
  std::vector<ad::Var> skips;
  ad::Var h = ad::gelu(time_bias(conv(x, "stem", 3, 1), time_hidden, "time.stem"));
  skips.push_back(h);
  for (int l = 1; l <= cfg_.encoder_depth; ++l) {
    const std::string enc = "enc" + std::to_string(l);
    h = ad::gelu(time_bias(conv(h, enc + ".down", 3, 2), time_hidden, "time.enc" + std::to_string(l)));
    h = ad::gelu(conv(h, enc + ".conv", 3, 1));
    skips.push_back(h);
  }

  for (int b = 0; b < cfg_.n_hidden_blocks; ++b) h = modulation_block(h, "block" + std::to_string(b));

  for (int l = cfg_.encoder_depth; l >= 1; --l) {
    const std::string dec = "dec" + std::to_string(l);
    h = ad::upsample2x(h);
    h = ad::gelu(time_bias(conv(h, dec + ".up", 3, 1), time_hidden, "time.dec" + std::to_string(l)));
    h = ad::concat_channels(h, skips[static_cast<std::size_t>(l - 1)]);
    h = ad::gelu(conv(h, dec + ".conv", 3, 1));
  }

  ad::Var psi = ad::exp_op(ad::add_channel_bias(ad::linear(h, param("head.psi.w")),
                                                param("head.psi.b")));
  ad::Var delta = ad::add_channel_bias(ad::linear(h, param("head.delta.w")),
                                       param("head.delta.b"));
  return {psi, delta};
}

}  // namespace aircast
