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
// Synthetic paired meteorology/pollutant worlds with known coupled dynamics.
//
// Pollutants evolve by semi-Lagrangian advection under a generated wind
// field, explicit diffusion, exponential decay and fixed sources;
// photochemical variables additionally gain a production term proportional
// to max(0, cos(solar zenith angle)), which imprints a genuine day/night
// (terminator) structure. Meteorology channels carry the true wind
// components plus decorrelated noise distractors, so a forecaster cannot
// benefit from meteorology by channel count alone.
// ---------------------------------------------------------------------------

enum class WindRegime { kZonal, kRotating, kStochasticMix };

WindRegime wind_regime_from_string(const std::string& s);
std::string to_string(WindRegime r);

struct PointSource {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double strength = 0.0;    // added per step at the source peak
  double sigma_cells = 2.0; // Gaussian footprint
  std::string variable;
};

struct WorldConfig {
  GridSpec grid = GridSpec::desk_scale();
  VariableCatalog catalog = VariableCatalog::synthetic_default();
  int n_steps = 100;
  std::uint64_t seed = 0;
  UtcTime start_time = utc_from_civil({2022, 1, 1, 0, 0, 0});

  WindRegime wind_regime = WindRegime::kStochasticMix;
  double mean_zonal_speed = 0.4;   // cells/step, modulated by cos(lat)
  double gust_speed = 0.9;         // cells/step, stochastic component amplitude
  double gust_persistence = 0.85;  // AR(1) coefficient of the stochastic wind

  double diffusion_coeff = 0.05;           // grid-units^2/step, explicit stepping
  std::vector<double> decay_rate;          // fraction/step per pollutant variable
  std::vector<PointSource> sources;
  std::vector<std::string> photo_vars;     // solar-driven production/destruction
  double photo_production = 0.5;           // peak production per step
  double photo_decay = 0.08;               // extra decay applied to photo_vars

  void validate() const;

  // The configuration used by the coupling-benefit study: strong stochastic
  // winds, two advected tracers, one photochemical variable.
  static WorldConfig verification_default(std::uint64_t seed, int n_steps);
};

// Cosine of the solar zenith angle from declination and hour angle.
double solar_zenith_cos(UtcTime t, double lat_deg, double lon_deg);

// In-memory world; write_pack(generate_world(cfg), path) lands it on disk.
PackData generate_world(const WorldConfig& config);

// One dynamics step, exposed for direct verification against closed forms.
// `wind_u`/`wind_v` are in cells/step, positive east/north.
Tensor advect_semi_lagrangian(const Tensor& field, const Tensor& wind_u, const Tensor& wind_v);
Tensor diffuse_explicit(const Tensor& field, double coeff);

}  // namespace aircast
