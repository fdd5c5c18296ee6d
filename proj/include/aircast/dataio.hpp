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

#include "aircast/grid.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// GridPack: a self-describing dataset directory.
//
//   <pack>/manifest.json      UTF-8 JSON header (schema below)
//   <pack>/pollutants.f32     n_times x n_lat x n_lon x C float32, little-endian
//   <pack>/meteorology.f32    n_times x n_lat x n_lon x D
//   <pack>/statics.f32        single record, n_lat x n_lon x S
//
// Layout is time-major, then row-major lat x lon, then channel-last. Values
// are stored in physical units; all normalization happens in memory.
// ---------------------------------------------------------------------------

struct GridPackManifest {
  GridSpec grid;
  VariableCatalog catalog;
  std::vector<UtcTime> times;  // strictly ascending, 12-hour spacing

  int n_times() const { return static_cast<int>(times.size()); }
  void validate() const;
};

// In-memory dataset handed to write_pack.
struct PackData {
  GridSpec grid;
  VariableCatalog catalog;
  std::vector<UtcTime> times;
  std::vector<Tensor> pollutants;   // one (M,N,C) tensor per time
  std::vector<Tensor> meteorology;  // one (M,N,D) tensor per time
  Tensor statics;                   // (M,N,S)
};

// One training sample: inputs around initial time t and the target at t+1.
struct TrainingWindow {
  FieldTensor p_prev;    // pollutants at t-1
  FieldTensor p_init;    // pollutants at t
  FieldTensor q_init;    // meteorology at t
  FieldTensor q_next;    // meteorology at t+1
  FieldTensor p_target;  // pollutants at t+1
};

class GridPack {
 public:
  static GridPack open(const std::string& path);

  const GridPackManifest& manifest() const { return manifest_; }
  const std::string& path() const { return path_; }
  int n_times() const { return manifest_.n_times(); }

  // Read one time record; never touches the rest of the file.
  FieldTensor pollutants_at(int t) const;
  FieldTensor meteorology_at(int t) const;
  const FieldTensor& statics() const { return statics_; }

  // The five tensors of one training sample. Valid for 1 <= t <= n_times-2.
  TrainingWindow slice_window(int t) const;

 private:
  GridPack() = default;
  FieldTensor read_record(const std::string& file, int record, int channels,
                          const std::vector<std::string>& names, UtcTime valid_time) const;

  std::string path_;
  GridPackManifest manifest_;
  FieldTensor statics_;
};

// Writes dataset atomically (temp directory + rename) and reopens it.
GridPack write_pack(const PackData& data, const std::string& path);

}  // namespace aircast
