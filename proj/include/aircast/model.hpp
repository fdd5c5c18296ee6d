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

#include "aircast/backbone.hpp"
#include "aircast/fusion.hpp"
#include "aircast/normalize.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// The full change-prediction model: bilinear fusion of the pollutant and
// meteorological stacks feeding the backbone, with the normalization
// statistics it was fitted against. Checkpoints are single versioned files:
// a JSON header (configs, stats, parameter manifest) followed by raw
// little-endian float64 parameter data.
// ---------------------------------------------------------------------------
class CoupledModel {
 public:
  CoupledModel(const FusionConfig& fusion_cfg, const ModelConfig& unet_cfg, NormStats stats,
               std::uint64_t seed);

  const FusionConfig& fusion_config() const { return fusion_cfg_; }
  const ModelConfig& unet_config() const { return unet_cfg_; }
  const NormStats& norm_stats() const { return stats_; }
  const FusionParams& fusion() const { return fusion_; }
  const UNet& unet() const { return unet_; }

  // p_in: (M, N, 2C+S) pollutant pair plus statics, model space.
  // q_in: (M, N, 2D) meteorological pair, model space.
  // Fuses, pads to the backbone multiple, runs the backbone conditioned on
  // the initial time, crops back. Returns (psi, delta) at (M, N, C).
  std::pair<ad::Var, ad::Var> predict(const ad::Var& p_in, const ad::Var& q_in,
                                      UtcTime initial_time) const;

  std::vector<std::pair<std::string, ad::Var>> named_params() const;
  std::int64_t parameter_count() const;

  void save_checkpoint(const std::string& path) const;
  static CoupledModel load_checkpoint(const std::string& path);

 private:
  FusionConfig fusion_cfg_;
  ModelConfig unet_cfg_;
  NormStats stats_;
  FusionParams fusion_;
  UNet unet_;
};

std::int64_t count_parameters_total(const FusionConfig& fusion_cfg, const ModelConfig& unet_cfg);

// Channel widths implied by a catalog: fusion reads the pollutant pair plus
// statics against the meteorological pair; the backbone emits C per head.
FusionConfig fusion_config_for(const VariableCatalog& catalog, int hidden_width,
                               int fused_channels, int receptive_field);

}  // namespace aircast
