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
#include <vector>

#include "aircast/dataio.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// Evaluation: latitude-weighted RMSE in physical units, baseline-normalized
// ratios, the variable x lead-day scorecard, and regional map exports.
// ---------------------------------------------------------------------------

// RMSE_k = sqrt( sum w_i (pred - truth)^2 / sum w_i ), per variable; a
// spatially uniform error of c yields exactly c.
std::vector<double> weighted_rmse(const FieldTensor& pred, const FieldTensor& truth,
                                  const std::vector<double>& w);

// variable -> lead steps (12 h units) -> value. Holds either physical RMSE
// or baseline-normalized ratios.
struct EvalReport {
  std::map<std::string, std::map<int, double>> values;

  std::string to_json() const;
  static EvalReport from_json(const std::string& text);
  void save(const std::string& path) const;
  static EvalReport load(const std::string& path);
};

// Scores every record of a forecast pack against the matching truth times.
// The lead index counts 12-hour steps since the forecast initialization
// (one step before the first record).
EvalReport evaluate_forecast_pack(const GridPack& truth, const GridPack& forecast);

// Averages several reports cell by cell (e.g. over forecast initializations
// or seeds); keys must agree.
EvalReport mean_reports(const std::vector<EvalReport>& reports);

// ratio = model / baseline per key; < 1 means the model wins. Both zero
// gives 1; baseline zero with nonzero model gives +inf.
EvalReport normalized_rmse(const EvalReport& model, const EvalReport& baseline);

// Rows = variables, columns = lead days (two 12-hour steps per day,
// averaged). Cells missing from the report come out as NaN and are written
// as empty CSV fields.
struct Scorecard {
  std::vector<std::string> row_labels;
  std::vector<int> lead_days;
  std::vector<std::vector<double>> cells;
  std::vector<double> better_fraction;  // per day: share of rows with cell < 1

  bool approx_equal(const Scorecard& o, double tol = 0.0) const;
};

Scorecard scorecard(const EvalReport& normalized);
void write_scorecard_csv(const Scorecard& card, const std::string& path);
Scorecard parse_scorecard_csv(const std::string& path);
// Simple red/blue heat map around 1.0, binary PPM.
void write_scorecard_ppm(const Scorecard& card, const std::string& path);

struct BBox {
  double lat_min = -90.0;
  double lat_max = 90.0;
  double lon_min = 0.0;
  double lon_max = 360.0;
};

// Writes the sub-grid of one variable as CSV (lon header row, lat-labelled
// rows) and optionally a fixed-scale grayscale PPM image.
void export_map(const FieldTensor& field, const GridSpec& grid, const std::string& variable,
                const BBox& bbox, const std::string& csv_path, const std::string& ppm_path = "");

// The sub-grid values behind export_map, for direct checking.
Tensor slice_bbox(const FieldTensor& field, const GridSpec& grid, const std::string& variable,
                  const BBox& bbox);

}  // namespace aircast
