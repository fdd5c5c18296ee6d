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

#include "aircast/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "aircast/grid.hpp"
#include "json.hpp"

using nlohmann::json;

namespace aircast {

std::vector<double> weighted_rmse(const FieldTensor& pred, const FieldTensor& truth,
                                  const std::vector<double>& w) {
  AIRCAST_CHECK(pred.values.size() > 0 && truth.values.size() > 0, ArgumentError,
                "weighted_rmse on an empty field");
  check_same_shape(pred.values, truth.values, "weighted_rmse");
  AIRCAST_CHECK(pred.var_names == truth.var_names, ArgumentError,
                "weighted_rmse catalogs disagree");
  const int h = pred.n_lat(), wd = pred.n_lon(), c = pred.n_channels();
  AIRCAST_CHECK(static_cast<int>(w.size()) == h, ShapeError, "weight length must match rows");

  std::vector<double> num(static_cast<std::size_t>(c), 0.0);
  double den = 0.0;
  for (int i = 0; i < h; ++i) {
    const double wi = w[static_cast<std::size_t>(i)];
    den += wi * wd;
    for (int j = 0; j < wd; ++j) {
      const double* a = pred.values.data() + (static_cast<std::int64_t>(i) * wd + j) * c;
      const double* b = truth.values.data() + (static_cast<std::int64_t>(i) * wd + j) * c;
      for (int ch = 0; ch < c; ++ch) {
        const double d = a[ch] - b[ch];
        num[static_cast<std::size_t>(ch)] += wi * d * d;
      }
    }
  }
  AIRCAST_CHECK(den > 0.0, ArgumentError, "all latitude weights are zero");
  std::vector<double> out(static_cast<std::size_t>(c));
  for (int ch = 0; ch < c; ++ch) out[static_cast<std::size_t>(ch)] = std::sqrt(num[static_cast<std::size_t>(ch)] / den);
  return out;
}

std::string EvalReport::to_json() const {
  json j;
  for (const auto& [var, leads] : values) {
    json jl;
    for (const auto& [lead, v] : leads) jl[std::to_string(lead)] = v;
    j[var] = jl;
  }
  return json{{"rmse", j}}.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
  EvalReport r;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError("bad report JSON: " + std::string(e.what()));
  }
  for (const auto& [var, leads] : j.at("rmse").items())
    for (const auto& [lead, v] : leads.items()) r.values[var][std::stoi(lead)] = v.get<double>();
  return r;
}

void EvalReport::save(const std::string& path) const {
  std::ofstream out(path);
  out << to_json() << "\n";
  AIRCAST_CHECK(out.good(), IntegrityError, "failed writing " + path);
}

EvalReport EvalReport::load(const std::string& path) {
  std::ifstream in(path);
  AIRCAST_CHECK(in.good(), IntegrityError, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

EvalReport evaluate_forecast_pack(const GridPack& truth, const GridPack& forecast) {
  const auto& tm = truth.manifest();
  const auto& fm = forecast.manifest();
  AIRCAST_CHECK(tm.grid == fm.grid, ArgumentError, "truth and forecast grids differ");
  AIRCAST_CHECK(tm.catalog.pollutant_vars == fm.catalog.pollutant_vars, ArgumentError,
                "truth and forecast catalogs differ");
  const std::vector<double> w = latitude_weights(tm.grid).w;
  const UtcTime init_time = fm.times.front() - kStepSeconds;

  EvalReport report;
  for (int k = 0; k < fm.n_times(); ++k) {
    const UtcTime t = fm.times[static_cast<std::size_t>(k)];
    const auto it = std::find(tm.times.begin(), tm.times.end(), t);
    AIRCAST_CHECK(it != tm.times.end(), ArgumentError,
                  "truth pack does not cover forecast time " + utc_to_iso(t));
    const int truth_idx = static_cast<int>(it - tm.times.begin());
    const int lead = static_cast<int>((t - init_time) / kStepSeconds);

    const FieldTensor pred = forecast.pollutants_at(k);
    const FieldTensor obs = truth.pollutants_at(truth_idx);
    const std::vector<double> rmse = weighted_rmse(pred, obs, w);
    for (int c = 0; c < static_cast<int>(rmse.size()); ++c)
      report.values[tm.catalog.pollutant_vars[static_cast<std::size_t>(c)]][lead] =
          rmse[static_cast<std::size_t>(c)];
  }
  return report;
}

EvalReport mean_reports(const std::vector<EvalReport>& reports) {
  AIRCAST_CHECK(!reports.empty(), ArgumentError, "no reports to average");
  EvalReport out = reports.front();
  for (std::size_t r = 1; r < reports.size(); ++r) {
    AIRCAST_CHECK(reports[r].values.size() == out.values.size(), ArgumentError,
                  "report keys disagree");
    for (auto& [var, leads] : out.values) {
      const auto it = reports[r].values.find(var);
      AIRCAST_CHECK(it != reports[r].values.end(), ArgumentError, "report keys disagree: " + var);
      for (auto& [lead, v] : leads) {
        const auto lt = it->second.find(lead);
        AIRCAST_CHECK(lt != it->second.end(), ArgumentError, "report leads disagree: " + var);
        v += lt->second;
      }
    }
  }
  for (auto& [var, leads] : out.values)
    for (auto& [lead, v] : leads) v /= static_cast<double>(reports.size());
  return out;
}

EvalReport normalized_rmse(const EvalReport& model, const EvalReport& baseline) {
  EvalReport out;
  AIRCAST_CHECK(model.values.size() == baseline.values.size(), ArgumentError,
                "model and baseline reports have different variables");
  for (const auto& [var, leads] : model.values) {
    const auto bit = baseline.values.find(var);
    AIRCAST_CHECK(bit != baseline.values.end(), ArgumentError,
                  "baseline report is missing variable " + var);
    for (const auto& [lead, v] : leads) {
      const auto blt = bit->second.find(lead);
      AIRCAST_CHECK(blt != bit->second.end(), ArgumentError,
                    "baseline report is missing lead " + std::to_string(lead) + " for " + var);
      const double b = blt->second;
      double ratio;
      if (b > 0.0)
        ratio = v / b;
      else
        ratio = v == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
      out.values[var][lead] = ratio;
    }
  }
  return out;
}

Scorecard scorecard(const EvalReport& normalized) {
  Scorecard card;
  int max_day = 0;
  for (const auto& [var, leads] : normalized.values) {
    card.row_labels.push_back(var);
    for (const auto& [lead, v] : leads) max_day = std::max(max_day, (lead + 1) / 2);
  }
  for (int d = 1; d <= max_day; ++d) card.lead_days.push_back(d);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& label : card.row_labels) {
    const auto& leads = normalized.values.at(label);
    std::vector<double> row;
    for (int d : card.lead_days) {
      double acc = 0.0;
      int n = 0;
      for (int lead : {2 * d - 1, 2 * d}) {
        const auto it = leads.find(lead);
        if (it != leads.end()) {
          acc += it->second;
          ++n;
        }
      }
      if (n == 0) {
        std::cerr << "warning: no leads for " << label << " at day " << d << "\n";
        row.push_back(nan);
      } else {
        row.push_back(acc / n);
      }
    }
    card.cells.push_back(std::move(row));
  }

  for (std::size_t d = 0; d < card.lead_days.size(); ++d) {
    int better = 0, total = 0;
    for (const auto& row : card.cells) {
      if (std::isnan(row[d])) continue;
      ++total;
      if (row[d] < 1.0) ++better;
    }
    card.better_fraction.push_back(total == 0 ? 0.0 : static_cast<double>(better) / total);
  }
  return card;
}

bool Scorecard::approx_equal(const Scorecard& o, double tol) const {
  if (row_labels != o.row_labels || lead_days != o.lead_days) return false;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t d = 0; d < cells[r].size(); ++d) {
      const double a = cells[r][d], b = o.cells[r][d];
      if (std::isnan(a) != std::isnan(b)) return false;
      if (!std::isnan(a) && std::abs(a - b) > tol) return false;
    }
  }
  return true;
}

void write_scorecard_csv(const Scorecard& card, const std::string& path) {
  std::ofstream out(path);
  AIRCAST_CHECK(out.good(), IntegrityError, "cannot write " + path);
  out << "variable";
  for (int d : card.lead_days) out << ",day" << d;
  out << "\n";
  char buf[64];
  for (std::size_t r = 0; r < card.row_labels.size(); ++r) {
    out << card.row_labels[r];
    for (std::size_t d = 0; d < card.lead_days.size(); ++d) {
      const double v = card.cells[r][d];
      if (std::isnan(v)) {
        out << ",";
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << "," << buf;
      }
    }
    out << "\n";
  }
  AIRCAST_CHECK(out.good(), IntegrityError, "short write to " + path);
}

Scorecard parse_scorecard_csv(const std::string& path) {
  std::ifstream in(path);
  AIRCAST_CHECK(in.good(), IntegrityError, "cannot open " + path);
  Scorecard card;
  std::string line;
  AIRCAST_CHECK(static_cast<bool>(std::getline(in, line)), FormatError, "empty scorecard CSV");
  {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    AIRCAST_CHECK(cell == "variable", FormatError, "bad scorecard header");
    while (std::getline(ss, cell, ',')) {
      AIRCAST_CHECK(cell.rfind("day", 0) == 0, FormatError, "bad scorecard column: " + cell);
      card.lead_days.push_back(std::stoi(cell.substr(3)));
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    card.row_labels.push_back(cell);
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
    }
    // Trailing empty cells drop out of the stream; pad them back.
    while (row.size() < card.lead_days.size())
      row.push_back(std::numeric_limits<double>::quiet_NaN());
    AIRCAST_CHECK(row.size() == card.lead_days.size(), FormatError,
                  "ragged scorecard row for " + card.row_labels.back());
    card.cells.push_back(std::move(row));
  }
  for (std::size_t d = 0; d < card.lead_days.size(); ++d) {
    int better = 0, total = 0;
    for (const auto& row : card.cells) {
      if (std::isnan(row[d])) continue;
      ++total;
      if (row[d] < 1.0) ++better;
    }
    card.better_fraction.push_back(total == 0 ? 0.0 : static_cast<double>(better) / total);
  }
  return card;
}

void write_scorecard_ppm(const Scorecard& card, const std::string& path) {
  const int cell_px = 12;
  const int wpx = static_cast<int>(card.lead_days.size()) * cell_px;
  const int hpx = static_cast<int>(card.row_labels.size()) * cell_px;
  AIRCAST_CHECK(wpx > 0 && hpx > 0, ArgumentError, "empty scorecard");
  std::ofstream out(path, std::ios::binary);
  AIRCAST_CHECK(out.good(), IntegrityError, "cannot write " + path);
  out << "P6\n" << wpx << " " << hpx << "\n255\n";
  for (int y = 0; y < hpx; ++y) {
    for (int x = 0; x < wpx; ++x) {
      const double v = card.cells[static_cast<std::size_t>(y / cell_px)]
                                 [static_cast<std::size_t>(x / cell_px)];
      unsigned char rgb[3] = {128, 128, 128};
      if (!std::isnan(v)) {
        // red below 1 (better than baseline), blue above.
        const double z = std::clamp((v - 1.0) / 0.5, -1.0, 1.0);
        rgb[0] = static_cast<unsigned char>(z < 0 ? 255 : 255 - 200 * z);
        rgb[1] = static_cast<unsigned char>(255 - 200 * std::abs(z));
        rgb[2] = static_cast<unsigned char>(z > 0 ? 255 : 255 + 200 * z);
      }
      out.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
  AIRCAST_CHECK(out.good(), IntegrityError, "short write to " + path);
}

Tensor slice_bbox(const FieldTensor& field, const GridSpec& grid, const std::string& variable,
                  const BBox& bbox) {
  const auto it = std::find(field.var_names.begin(), field.var_names.end(), variable);
  AIRCAST_CHECK(it != field.var_names.end(), ArgumentError, "variable not in field: " + variable);
  const int ch = static_cast<int>(it - field.var_names.begin());

  AIRCAST_CHECK(bbox.lat_min < bbox.lat_max && bbox.lon_min < bbox.lon_max, ArgumentError,
                "empty bounding box");
  int i0 = static_cast<int>(std::ceil((90.0 - bbox.lat_max) / grid.resolution_deg));
  int i1 = static_cast<int>(std::floor((90.0 - bbox.lat_min) / grid.resolution_deg));
  int j0 = static_cast<int>(std::ceil(bbox.lon_min / grid.resolution_deg));
  int j1 = static_cast<int>(std::floor(bbox.lon_max / grid.resolution_deg));
  i0 = std::max(i0, 0);
  i1 = std::min(i1, grid.n_lat - 1);
  j0 = std::max(j0, 0);
  j1 = std::min(j1, grid.n_lon);  // lon_max = 360 covers the full circle
  if (j1 == grid.n_lon) j1 = grid.n_lon - 1;
  AIRCAST_CHECK(i0 <= i1 && j0 <= j1, ArgumentError, "bounding box selects no cells");

  Tensor out({i1 - i0 + 1, j1 - j0 + 1, 1});
  for (int i = i0; i <= i1; ++i)
    for (int j = j0; j <= j1; ++j) out.at(i - i0, j - j0, 0) = field.values.at(i, j, ch);
  return out;
}

void export_map(const FieldTensor& field, const GridSpec& grid, const std::string& variable,
                const BBox& bbox, const std::string& csv_path, const std::string& ppm_path) {
  const Tensor sub = slice_bbox(field, grid, variable, bbox);
  const int i0 = static_cast<int>(std::ceil((90.0 - bbox.lat_max) / grid.resolution_deg));
  const int j0 = static_cast<int>(std::ceil(std::max(0.0, bbox.lon_min) / grid.resolution_deg));

  std::ofstream out(csv_path);
  AIRCAST_CHECK(out.good(), IntegrityError, "cannot write " + csv_path);
  char buf[64];
  out << "lat\\lon";
  for (int j = 0; j < sub.dim(1); ++j) {
    std::snprintf(buf, sizeof(buf), "%.6g", longitude_of(j0 + j, grid));
    out << "," << buf;
  }
  out << "\n";
  for (int i = 0; i < sub.dim(0); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6g", latitude_of(std::max(i0, 0) + i, grid));
    out << buf;
    for (int j = 0; j < sub.dim(1); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", sub.at(i, j, 0));
      out << "," << buf;
    }
    out << "\n";
  }
  AIRCAST_CHECK(out.good(), IntegrityError, "short write to " + csv_path);

  if (!ppm_path.empty()) {
    double vmax = 0.0;
    for (std::int64_t i = 0; i < sub.size(); ++i) vmax = std::max(vmax, std::abs(sub[i]));
    if (vmax == 0.0) vmax = 1.0;
    std::ofstream img(ppm_path, std::ios::binary);
    AIRCAST_CHECK(img.good(), IntegrityError, "cannot write " + ppm_path);
    img << "P6\n" << sub.dim(1) << " " << sub.dim(0) << "\n255\n";
    for (int i = 0; i < sub.dim(0); ++i) {
      for (int j = 0; j < sub.dim(1); ++j) {
        const auto g = static_cast<unsigned char>(
            std::clamp(255.0 * sub.at(i, j, 0) / vmax, 0.0, 255.0));
        const unsigned char rgb[3] = {g, g, g};
        img.write(reinterpret_cast<const char*>(rgb), 3);
      }
    }
    AIRCAST_CHECK(img.good(), IntegrityError, "short write to " + ppm_path);
  }
}

}  // namespace aircast
