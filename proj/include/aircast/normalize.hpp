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
#include <vector>

#include "aircast/dataio.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// Data normalization.
//
// Pollutants divide by a per-variable scale (half the spatial maximum,
// averaged over time), which puts typical values in [0, 2]. Heavily skewed
// variables additionally pass through a log-boost transform that expands
// low-magnitude structure while staying strictly increasing. Meteorology is
// standardized per variable.
// ---------------------------------------------------------------------------

struct NormStats {
  std::vector<std::string> pollutant_vars;
  std::vector<double> pollutant_scale;  // > 0
  std::vector<std::string> met_vars;
  std::vector<double> met_mean;
  std::vector<double> met_std;  // > 0
  std::vector<std::string> skew_vars;
  double skew_floor = 1e-8;

  bool is_skewed(int pollutant_index) const;
  void validate() const;

  std::string to_json() const;
  static NormStats from_json(const std::string& text);
  void save(const std::string& path) const;
  static NormStats load(const std::string& path);
};

// scale_v = (1/2) * mean over time of the spatial maximum. All-zero
// variables get scale 1 (they carry no signal; a zero scale would divide by
// zero downstream). Restrict to times [t_begin, t_end) so statistics can be
// fit on a training split.
std::vector<double> compute_pollutant_scales(const GridPack& pack, int t_begin, int t_end);

// Fits everything: pollutant scales, met mean/std, and the skew-variable set
// (explicit list; pass the catalog default from default_skew_vars).
NormStats fit_norm_stats(const GridPack& pack, int t_begin, int t_end,
                         std::vector<std::string> skew_vars);

// Spiky anthropogenic species get the skew treatment by default.
std::vector<std::string> default_skew_vars(const VariableCatalog& catalog);

inline double normalize_pollutant(double x, double scale_v) { return x / scale_v; }
inline double denormalize_pollutant(double x_norm, double scale_v) { return x_norm * scale_v; }

// x_trans = x + log10(x * 2.5e4) / log10(25), clamped below at skew_floor.
// Strictly increasing on [skew_floor, inf).
double skew_transform(double x_norm, double skew_floor = 1e-8);

// Numerical inverse via bracketed root finding; |forward(result) - x_trans|
// <= 1e-10 relative. Inputs below the floor image clamp to the floor.
double skew_inverse(double x_trans, double skew_floor = 1e-8);

inline double normalize_met(double x, double mean, double std_dev) { return (x - mean) / std_dev; }
inline double denormalize_met(double z, double mean, double std_dev) { return z * std_dev + mean; }

// Whole-field helpers used by training and inference. Pollutant transforms
// map physical -> model space (scale, then skew for flagged variables) and
// back; the inverse clamps physical values at zero.
Tensor pollutants_to_model_space(const Tensor& physical, const NormStats& stats);
Tensor pollutants_to_physical(const Tensor& model_space, const NormStats& stats);
Tensor met_to_model_space(const Tensor& physical, const NormStats& stats);

}  // namespace aircast
