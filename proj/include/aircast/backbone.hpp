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

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "aircast/autodiff.hpp"
#include "aircast/common.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// Encoder-decoder backbone. Four strided-conv encoder levels halve the grid
// and double the width; convolutional-modulation blocks (large-kernel
// depthwise convolution gating a linear value branch, plus a feed-forward
// sublayer, both residual) process the bottleneck; four decoder levels
// upsample with skip connections from the matching encoder level. A Fourier
// time embedding is projected and added as a per-channel bias at every
// level. Twin 1x1 heads emit the multiplicative change (through exp, so it
// is positive and starts at exactly 1) and the additive change (zero at
// initialization): a freshly initialized network is the identity on the
// pollutant base.
// ---------------------------------------------------------------------------

struct ModelConfig {
  int in_channels = 0;   // fused feature width G
  int out_channels = 0;  // pollutant variables C, per head
  int encoder_depth = 4;
  int base_width = 16;
  int width_mult = 2;
  int n_hidden_blocks = 2;
  int hidden_kernel = 11;
  int mlp_expansion = 2;
  int time_embed_dim = 32;
  double angular_factor = 2.0 * 3.14159265358979323846;

  void validate() const;
  int width_at(int level) const;  // level 0 (full resolution) .. encoder_depth
  int pad_multiple() const { return 1 << encoder_depth; }

  // Operational-scale defaults (with FusionConfig::full_scale_default):
  // ~178M parameters.
  static ModelConfig full_scale_default();
};

// Fourier clock features of a timestamp: day-of-year and hour-of-day phases,
// [cos, sin] each, wavelengths 366 days and 24 hours.
struct TimeEmbedding {
  double lambda_day = 366.0;
  double lambda_hour = 24.0;
  double angular_factor = 2.0 * 3.14159265358979323846;

  Tensor embed(UtcTime t) const;  // 4-vector in [-1, 1]
};

Tensor time_embed(UtcTime t, double angular_factor = 2.0 * 3.14159265358979323846);

// Grow a field to the next multiple of `multiple` in both spatial dims
// (periodic in longitude, replicated in latitude) and remember the original
// extent; crop_to undoes it exactly.
struct PaddedField {
  Tensor values;
  int orig_h = 0;
  int orig_w = 0;
};
PaddedField pad_to_multiple(const Tensor& field, int multiple);
Tensor crop_to(const Tensor& field, int h, int w);

class UNet {
 public:
  UNet(const ModelConfig& cfg, Rng& rng);

  const ModelConfig& config() const { return cfg_; }

  // x must be pre-padded: spatial dims divisible by 2^encoder_depth.
  // Returns (psi, delta), each with out_channels channels at x's resolution.
  std::pair<ad::Var, ad::Var> forward(const ad::Var& x, const Tensor& emb4) const;

  std::vector<std::pair<std::string, ad::Var>> named_params() const;
  const ad::Var& param(const std::string& name) const;

 private:
  ad::Var conv(const ad::Var& x, const std::string& name, int kernel, int stride) const;
  ad::Var modulation_block(const ad::Var& x, const std::string& prefix) const;
  ad::Var time_bias(const ad::Var& x, const ad::Var& time_hidden, const std::string& site) const;

  ModelConfig cfg_;
  std::map<std::string, ad::Var> params_;
};

// Parameter inventory of a config, in allocation order. Instantiating a
// config allocates exactly these tensors, so budget checks can count
// without allocating.
std::vector<std::pair<std::string, std::vector<int>>> parameter_shapes(const ModelConfig& cfg);
std::int64_t count_parameters(const ModelConfig& cfg);

}  // namespace aircast
