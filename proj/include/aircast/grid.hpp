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

#include "aircast/common.hpp"
#include "aircast/tensor.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// Global latitude-longitude grid. Latitude rows run pole to pole inclusive
// (90 .. -90); longitude columns run [0, 360) ascending east. Both poles are
// grid rows, so resolution = 180/(n_lat-1) = 360/n_lon.
// ---------------------------------------------------------------------------
struct GridSpec {
  int n_lat = 0;
  int n_lon = 0;
  double resolution_deg = 0.0;

  GridSpec() = default;
  GridSpec(int n_lat_, int n_lon_);

  bool operator==(const GridSpec&) const = default;

  std::int64_t cells() const { return static_cast<std::int64_t>(n_lat) * n_lon; }

  // 451 x 900 at 0.4 degrees.
  static GridSpec full_scale() { return GridSpec(451, 900); }
  // 46 x 90 at 4 degrees, small enough for a workstation.
  static GridSpec desk_scale() { return GridSpec(46, 90); }
};

// Latitude in degrees of row i (row 0 is the north pole).
double latitude_of(int i, const GridSpec& spec);

// Longitude in degrees of column j, in [0, 360).
double longitude_of(int j, const GridSpec& spec);

struct LatitudeWeights {
  std::vector<double> w;  // cos(latitude), one entry per row
};

// Area-compensating weights: w_i = cos(latitude(i)); exactly zero at the
// pole rows, one at the equator row when present.
LatitudeWeights latitude_weights(const GridSpec& spec);

// ---------------------------------------------------------------------------
// Variable catalog: channel layout for pollutant, meteorological, and static
// fields. Names are unique per list; greyline_vars marks pollutant species
// whose distribution follows the day/night terminator.
// ---------------------------------------------------------------------------
struct VariableCatalog {
  std::vector<std::string> pollutant_vars;
  std::vector<std::string> met_vars;
  std::vector<std::string> static_vars;
  std::vector<int> pressure_levels;  // hPa labels, may be empty
  std::vector<std::string> greyline_vars;

  int n_pollutants() const { return static_cast<int>(pollutant_vars.size()); }
  int n_met() const { return static_cast<int>(met_vars.size()); }
  int n_static() const { return static_cast<int>(static_vars.size()); }

  bool is_greyline(const std::string& v) const;
  int pollutant_index(const std::string& v) const;

  void validate() const;

  // Operational-scale catalog: 5 total-column species + 5 species at 13
  // pressure levels + 3 particulate-matter variables (C=73), 5 surface + 5
  // per-level meteorological variables (D=70), 5 static channels.
  static VariableCatalog cams_default();

  // Small synthetic catalog used by the verification world: two advected
  // tracers plus one photochemical variable.
  static VariableCatalog synthetic_default();
};

// ---------------------------------------------------------------------------
// A timestamped gridded multi-channel field.
// ---------------------------------------------------------------------------
struct FieldTensor {
  Tensor values;  // (n_lat, n_lon, K)
  std::vector<std::string> var_names;
  UtcTime valid_time = 0;

  FieldTensor() = default;
  FieldTensor(const GridSpec& spec, std::vector<std::string> names, UtcTime t);

  int n_lat() const { return values.dim(0); }
  int n_lon() const { return values.dim(1); }
  int n_channels() const { return values.dim(2); }

  void validate(const GridSpec& spec) const;
};

// Concatenate along the channel dimension; channel order is input order.
// All inputs must share the grid shape.
FieldTensor concat_channels(const std::vector<FieldTensor>& tensors);

// Extract a contiguous channel range [from, to).
FieldTensor slice_channels(const FieldTensor& t, int from, int to);

}  // namespace aircast
