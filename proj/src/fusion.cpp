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

#include "aircast/fusion.hpp"

#include <cmath>

namespace aircast {

void FusionConfig::validate() const {
  AIRCAST_CHECK(pollutant_channels > 0 && met_channels > 0 && hidden_width > 0 &&
                    fused_channels > 0,
                ConfigError, "fusion widths must be positive");
  AIRCAST_CHECK(receptive_field == 1 || receptive_field == 3, ConfigError,
                "receptive_field must be 1 or 3");
}

FusionParams FusionParams::init(const FusionConfig& cfg, Rng& rng) {
  cfg.validate();
  const int r2 = cfg.receptive_field * cfg.receptive_field;
  auto init_mat = [&rng](int rows, int cols) {
    Tensor t({rows, cols});
    const double sd = std::sqrt(1.0 / rows);
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = sd * rng.normal();
    return t;
  };
  FusionParams p;
  p.cfg = cfg;
  p.w_p = ad::make_param(init_mat(r2 * cfg.pollutant_channels, cfg.hidden_width));
  p.w_q = ad::make_param(init_mat(r2 * cfg.met_channels, cfg.hidden_width));
  p.w_x = ad::make_param(init_mat(cfg.hidden_width, cfg.fused_channels));
  return p;
}

FusionParams FusionParams::from_tensors(const FusionConfig& cfg, Tensor wp, Tensor wq, Tensor wx) {
  cfg.validate();
  const int r2 = cfg.receptive_field * cfg.receptive_field;
  AIRCAST_CHECK(wp.ndim() == 2 && wp.dim(0) == r2 * cfg.pollutant_channels &&
                    wp.dim(1) == cfg.hidden_width,
                ShapeError, "w_p shape does not match fusion config");
  AIRCAST_CHECK(wq.ndim() == 2 && wq.dim(0) == r2 * cfg.met_channels &&
                    wq.dim(1) == cfg.hidden_width,
                ShapeError, "w_q shape does not match fusion config");
  AIRCAST_CHECK(wx.ndim() == 2 && wx.dim(0) == cfg.hidden_width && wx.dim(1) == cfg.fused_channels,
                ShapeError, "w_x shape does not match fusion config");
  FusionParams p;
  p.cfg = cfg;
  p.w_p = ad::make_param(std::move(wp));
  p.w_q = ad::make_param(std::move(wq));
  p.w_x = ad::make_param(std::move(wx));
  return p;
}

std::vector<std::pair<std::string, ad::Var>> FusionParams::named_params() const {
  return {{"fusion.w_p", w_p}, {"fusion.w_q", w_q}, {"fusion.w_x", w_x}};
}

Tensor fuse_pointwise(const Tensor& p, const Tensor& q, const FusionParams& params) {
  const FusionConfig& cfg = params.cfg;
  AIRCAST_CHECK(cfg.receptive_field == 1, ArgumentError,
                "fuse_pointwise needs receptive_field = 1 parameters");
  AIRCAST_CHECK(p.size() == cfg.pollutant_channels, ShapeError,
                "pollutant vector length mismatch");
  AIRCAST_CHECK(q.size() == cfg.met_channels, ShapeError, "met vector length mismatch");

  const Tensor& wp = params.w_p->value;
  const Tensor& wq = params.w_q->value;
  const Tensor& wx = params.w_x->value;
  const int H = cfg.hidden_width, G = cfg.fused_channels;

  std::vector<double> hp(static_cast<std::size_t>(H), 0.0), hq(static_cast<std::size_t>(H), 0.0);
  for (int h = 0; h < H; ++h) {
    for (int a = 0; a < cfg.pollutant_channels; ++a) hp[static_cast<std::size_t>(h)] += wp.at(a, h) * p[a];
    for (int b = 0; b < cfg.met_channels; ++b) hq[static_cast<std::size_t>(h)] += wq.at(b, h) * q[b];
  }
  Tensor out({G});
  for (int g = 0; g < G; ++g) {
    double acc = 0.0;
    for (int h = 0; h < H; ++h)
      acc += wx.at(h, g) * hp[static_cast<std::size_t>(h)] * hq[static_cast<std::size_t>(h)];
    out[g] = acc;
  }
  return out;
}

Tensor bilinear_oracle(const Tensor& p, const Tensor& q, const FusionParams& params) {
  const FusionConfig& cfg = params.cfg;
  AIRCAST_CHECK(cfg.receptive_field == 1, ArgumentError,
                "bilinear_oracle needs receptive_field = 1 parameters");
  const Tensor& wp = params.w_p->value;
  const Tensor& wq = params.w_q->value;
  const Tensor& wx = params.w_x->value;

  Tensor out({cfg.fused_channels});
  for (int g = 0; g < cfg.fused_channels; ++g) {
    double acc = 0.0;
    for (int a = 0; a < cfg.pollutant_channels; ++a) {
      for (int b = 0; b < cfg.met_channels; ++b) {
        double bab = 0.0;
        for (int h = 0; h < cfg.hidden_width; ++h) bab += wp.at(a, h) * wx.at(h, g) * wq.at(b, h);
        acc += p[a] * bab * q[b];
      }
    }
    out[g] = acc;
  }
  return out;
}

ad::Var fuse_field_graph(const ad::Var& p_in, const ad::Var& q_in, const FusionParams& params) {
  const FusionConfig& cfg = params.cfg;
  AIRCAST_CHECK(p_in->value.ndim() == 3 && q_in->value.ndim() == 3, ShapeError,
                "fuse_field expects rank-3 fields");
  AIRCAST_CHECK(p_in->value.dim(2) == cfg.pollutant_channels, ShapeError,
                "pollutant stack width mismatch");
  AIRCAST_CHECK(q_in->value.dim(2) == cfg.met_channels, ShapeError, "met stack width mismatch");
  AIRCAST_CHECK(p_in->value.dim(0) == q_in->value.dim(0) &&
                    p_in->value.dim(1) == q_in->value.dim(1),
                ShapeError, "fusion inputs on different grids");

  const int r = cfg.receptive_field;
  const ad::Var pc = ad::im2col(p_in, r, 1);
  const ad::Var qc = ad::im2col(q_in, r, 1);
  const ad::Var hp = ad::linear(pc, params.w_p);
  const ad::Var hq = ad::linear(qc, params.w_q);
  return ad::linear(ad::mul(hp, hq), params.w_x);
}

Tensor fuse_field(const Tensor& p_in, const Tensor& q_in, const FusionParams& params) {
  ad::NoGradGuard ng;
  return fuse_field_graph(ad::constant(p_in), ad::constant(q_in), params)->value;
}

}  // namespace aircast
