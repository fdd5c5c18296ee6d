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

#include "aircast/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

namespace aircast {

GridSpec::GridSpec(int n_lat_, int n_lon_) : n_lat(n_lat_), n_lon(n_lon_) {
  AIRCAST_CHECK(n_lat >= 2 && n_lon >= 2, ConfigError, "grid needs at least 2x2 cells");
  resolution_deg = 180.0 / (n_lat - 1);
  const double lon_res = 360.0 / n_lon;
  AIRCAST_CHECK(std::abs(resolution_deg - lon_res) < 1e-9, ConfigError,
                "grid is not square: 180/(n_lat-1) != 360/n_lon");
}

double latitude_of(int i, const GridSpec& spec) {
  AIRCAST_CHECK(i >= 0 && i < spec.n_lat, RangeError, "latitude row index out of range");
  // 90 - i*resolution, evaluated as an exact integer ratio so the poles and
  // the equator row come out exact.
  return 90.0 * (spec.n_lat - 1 - 2 * i) / (spec.n_lat - 1);
}

double longitude_of(int j, const GridSpec& spec) {
  AIRCAST_CHECK(j >= 0 && j < spec.n_lon, RangeError, "longitude column index out of range");
  return 360.0 * j / spec.n_lon;
}

LatitudeWeights latitude_weights(const GridSpec& spec) {
  LatitudeWeights lw;
  lw.w.resize(static_cast<std::size_t>(spec.n_lat));
  for (int i = 0; i < spec.n_lat; ++i) {
    const double lat = latitude_of(i, spec);
    // cos(±90°) in radians lands a hair off zero; pin the poles exactly.
    double w = (std::abs(std::abs(lat) - 90.0) < 1e-12) ? 0.0 : std::cos(lat * M_PI / 180.0);
    lw.w[static_cast<std::size_t>(i)] = w;
  }
  return lw;
}

bool VariableCatalog::is_greyline(const std::string& v) const {
  return std::find(greyline_vars.begin(), greyline_vars.end(), v) != greyline_vars.end();
}

int VariableCatalog::pollutant_index(const std::string& v) const {
  auto it = std::find(pollutant_vars.begin(), pollutant_vars.end(), v);
  AIRCAST_CHECK(it != pollutant_vars.end(), ArgumentError, "unknown pollutant variable: " + v);
  return static_cast<int>(it - pollutant_vars.begin());
}

void VariableCatalog::validate() const {
  auto check_unique = [](const std::vector<std::string>& names, const char* what) {
    std::set<std::string> seen(names.begin(), names.end());
    AIRCAST_CHECK(seen.size() == names.size(), ConfigError,
                  std::string("duplicate variable name in ") + what);
  };
  check_unique(pollutant_vars, "pollutant_vars");
  check_unique(met_vars, "met_vars");
  check_unique(static_vars, "static_vars");
  for (const auto& g : greyline_vars) {
    AIRCAST_CHECK(std::find(pollutant_vars.begin(), pollutant_vars.end(), g) !=
                      pollutant_vars.end(),
                  ConfigError, "greyline variable not in pollutant catalog: " + g);
  }
}

VariableCatalog VariableCatalog::cams_default() {
  VariableCatalog cat;
  const std::vector<std::string> species = {"co", "no", "no2", "so2", "o3"};
  cat.pressure_levels = {50, 100, 150, 200, 250, 300, 400, 500, 600, 700, 850, 925, 1000};

  for (const auto& s : species) cat.pollutant_vars.push_back("tc_" + s);
  for (const auto& s : species)
    for (int lev : cat.pressure_levels) cat.pollutant_vars.push_back(s + "_" + std::to_string(lev));
  cat.pollutant_vars.insert(cat.pollutant_vars.end(), {"pm1", "pm2_5", "pm10"});

  const std::vector<std::string> met_surface = {"t2m", "u10", "v10", "msl", "tp"};
  const std::vector<std::string> met_upper = {"u", "v", "t", "rh", "z"};
  cat.met_vars = met_surface;
  for (const auto& s : met_upper)
    for (int lev : cat.pressure_levels) cat.met_vars.push_back(s + "_" + std::to_string(lev));

  cat.static_vars = {"orography", "land_sea_mask", "latitude_norm", "sin_longitude",
                     "cos_longitude"};

  // Photochemically active species track the terminator.
  for (const auto& v : cat.pollutant_vars) {
    if (v.rfind("tc_no", 0) == 0 || v.rfind("tc_o3", 0) == 0 || v.rfind("no", 0) == 0 ||
        v.rfind("o3", 0) == 0) {
      cat.greyline_vars.push_back(v);
    }
  }
  cat.validate();
  return cat;
}

VariableCatalog VariableCatalog::synthetic_default() {
  VariableCatalog cat;
  cat.pollutant_vars = {"plume", "blob", "photo"};
  cat.met_vars = {"wind_u", "wind_v", "noise_a", "noise_b"};
  cat.static_vars = {"orography", "land_sea_mask", "latitude_norm", "sin_longitude",
                     "cos_longitude"};
  cat.greyline_vars = {"photo"};
  cat.validate();
  return cat;
}

FieldTensor::FieldTensor(const GridSpec& spec, std::vector<std::string> names, UtcTime t)
    : values({spec.n_lat, spec.n_lon, static_cast<int>(names.size())}),
      var_names(std::move(names)),
      valid_time(t) {}

void FieldTensor::validate(const GridSpec& spec) const {
  AIRCAST_CHECK(values.ndim() == 3, ShapeError, "field tensor must be rank 3");
  AIRCAST_CHECK(values.dim(0) == spec.n_lat && values.dim(1) == spec.n_lon, ShapeError,
                "field tensor does not match grid");
  AIRCAST_CHECK(values.dim(2) == static_cast<int>(var_names.size()), ShapeError,
                "channel count does not match variable names");
  AIRCAST_CHECK(all_finite(values), IntegrityError, "field tensor holds non-finite values");
}

FieldTensor concat_channels(const std::vector<FieldTensor>& tensors) {
  AIRCAST_CHECK(!tensors.empty(), ArgumentError, "concat_channels needs at least one input");
  const int h = tensors[0].n_lat();
  const int w = tensors[0].n_lon();
  int k_total = 0;
  for (const auto& t : tensors) {
    AIRCAST_CHECK(t.n_lat() == h && t.n_lon() == w, ShapeError,
                  "concat_channels inputs on different grids");
    k_total += t.n_channels();
  }

  FieldTensor out;
  out.values = Tensor({h, w, k_total});
  out.valid_time = tensors[0].valid_time;
  for (const auto& t : tensors)
    out.var_names.insert(out.var_names.end(), t.var_names.begin(), t.var_names.end());

  double* dst = out.values.data();
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (const auto& t : tensors) {
        const int k = t.n_channels();
        const double* src = t.values.data() + (static_cast<std::int64_t>(i) * w + j) * k;
        std::memcpy(dst, src, static_cast<std::size_t>(k) * sizeof(double));
        dst += k;
      }
    }
  }
  return out;
}

FieldTensor slice_channels(const FieldTensor& t, int from, int to) {
  AIRCAST_CHECK(0 <= from && from <= to && to <= t.n_channels(), RangeError,
                "channel slice out of range");
  const int h = t.n_lat(), w = t.n_lon(), k = t.n_channels(), ks = to - from;
  FieldTensor out;
  out.values = Tensor({h, w, ks});
  out.valid_time = t.valid_time;
  out.var_names.assign(t.var_names.begin() + from, t.var_names.begin() + to);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      std::memcpy(out.values.data() + (static_cast<std::int64_t>(i) * w + j) * ks,
                  t.values.data() + (static_cast<std::int64_t>(i) * w + j) * k + from,
                  static_cast<std::size_t>(ks) * sizeof(double));
  return out;
}

bool all_finite(const Tensor& t) {
  const double* p = t.data();
  for (std::int64_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

}  // namespace aircast
