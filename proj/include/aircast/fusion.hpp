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

#include "aircast/autodiff.hpp"
#include "aircast/common.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// Low-rank bilinear pooling of the pollutant and meteorological stacks.
//
// Both modalities are mapped into a shared hidden space, combined by an
// elementwise (Hadamard) product, and projected to the fused width:
//
//     x = W_x^T (W_p^T p  o  W_q^T q)
//
// which factorizes a full bilinear form x_g = p^T B_g q through rank-H
// inner structure. With receptive_field = 3 the mappings read the
// flattened 3x3 neighbourhood of each cell instead of the cell alone
// (periodic in longitude, replicated in latitude), so the fused feature
// sees adjacent-cell interactions. The projection keeps one output per
// center cell, which reduces exactly to the pointwise form when the
// neighbourhood weights vanish outside the center block.
// ---------------------------------------------------------------------------

struct FusionConfig {
  int pollutant_channels = 0;  // pollutant pair plus static channels (2C + S)
  int met_channels = 0;        // meteorological pair (2D)
  int hidden_width = 0;        // H
  int fused_channels = 0;      // G, the backbone input width
  int receptive_field = 3;     // r: 1 (pointwise) or 3 (neighbourhood)

  void validate() const;
};

struct FusionParams {
  FusionConfig cfg;
  ad::Var w_p;  // (r^2 * pollutant_channels) x H
  ad::Var w_q;  // (r^2 * met_channels) x H
  ad::Var w_x;  // H x G

  static FusionParams init(const FusionConfig& cfg, Rng& rng);
  // Wraps existing weight tensors; shapes must match cfg.
  static FusionParams from_tensors(const FusionConfig& cfg, Tensor wp, Tensor wq, Tensor wx);

  std::vector<std::pair<std::string, ad::Var>> named_params() const;
};

// Single-location fusion for receptive_field = 1: p has 2C' entries, q has
// 2D entries, result has G entries.
Tensor fuse_pointwise(const Tensor& p, const Tensor& q, const FusionParams& params);

// Brute-force expansion of the factorized form: x_g = p^T B_g q with
// B_g = W_p diag(W_x[:, g]) W_q^T, summed index by index. Verification
// reference for fuse_pointwise; never used in the model path.
Tensor bilinear_oracle(const Tensor& p, const Tensor& q, const FusionParams& params);

// Whole-field fusion: (M, N, 2C') x (M, N, 2D) -> (M, N, G).
Tensor fuse_field(const Tensor& p_in, const Tensor& q_in, const FusionParams& params);

// Differentiable fusion graph used by the forecasting model.
ad::Var fuse_field_graph(const ad::Var& p_in, const ad::Var& q_in, const FusionParams& params);

}  // namespace aircast
