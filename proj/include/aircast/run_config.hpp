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

#include <string>

#include "aircast/backbone.hpp"
#include "aircast/synthworld.hpp"
#include "aircast/training.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// One JSON file drives every CLI command. Every field has a default; unknown
// keys are rejected with the offending path. See configs/desk.json for a
// complete example and the README for the schema.
// ---------------------------------------------------------------------------
struct RunConfig {
  GridSpec grid = GridSpec::desk_scale();
  std::string catalog_preset = "synthetic";  // "synthetic" | "cams"
  VariableCatalog catalog = VariableCatalog::synthetic_default();

  WorldConfig world;  // grid/catalog mirrored from above

  // Backbone and fusion hyper-parameters; channel counts derive from the
  // catalog at model-construction time.
  int base_width = 16;
  int n_hidden_blocks = 2;
  int hidden_kernel = 11;
  int mlp_expansion = 2;
  int time_embed_dim = 32;
  double angular_factor = 2.0 * 3.14159265358979323846;
  int fusion_hidden_width = 48;
  int fused_channels = 24;
  int receptive_field = 3;

  TrainConfig train;
  std::vector<std::string> skew_vars;  // defaults to the catalog rule

  // Artifact paths.
  std::string pack_path = "data/world";
  std::string stats_path = "out/norm_stats.json";
  std::string checkpoint_path = "out/model.ckpt";
  std::string metrics_path = "out/metrics.jsonl";
  std::string forecast_path = "out/forecast";

  ModelConfig model_config() const;
  FusionConfig fusion_config() const;

  static RunConfig defaults();
  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json() const;  // fully-populated, usable as a template
};

}  // namespace aircast
