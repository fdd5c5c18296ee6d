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

#include "aircast/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "json.hpp"

using nlohmann::json;

namespace aircast {

bool NormStats::is_skewed(int pollutant_index) const {
  const auto& name = pollutant_vars[static_cast<std::size_t>(pollutant_index)];
  return std::find(skew_vars.begin(), skew_vars.end(), name) != skew_vars.end();
}

void NormStats::validate() const {
  AIRCAST_CHECK(pollutant_vars.size() == pollutant_scale.size(), ConfigError,
                "pollutant scale count mismatch");
  AIRCAST_CHECK(met_vars.size() == met_mean.size() && met_vars.size() == met_std.size(),
                ConfigError, "met stats count mismatch");
  for (double s : pollutant_scale)
    AIRCAST_CHECK(s > 0.0, ConfigError, "pollutant scale must be positive");
  for (double s : met_std) AIRCAST_CHECK(s > 0.0, ConfigError, "met std must be positive");
  AIRCAST_CHECK(skew_floor > 0.0, ConfigError, "skew_floor must be positive");
}

std::string NormStats::to_json() const {
  json j{{"pollutant_vars", pollutant_vars}, {"pollutant_scale", pollutant_scale},
         {"met_vars", met_vars},             {"met_mean", met_mean},
         {"met_std", met_std},               {"skew_vars", skew_vars},
         {"skew_floor", skew_floor}};
  return j.dump(2);
}

NormStats NormStats::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError("bad NormStats JSON: " + std::string(e.what()));
  }
  NormStats s;
  s.pollutant_vars = j.at("pollutant_vars").get<std::vector<std::string>>();
  s.pollutant_scale = j.at("pollutant_scale").get<std::vector<double>>();
  s.met_vars = j.at("met_vars").get<std::vector<std::string>>();
  s.met_mean = j.at("met_mean").get<std::vector<double>>();
  s.met_std = j.at("met_std").get<std::vector<double>>();
  s.skew_vars = j.at("skew_vars").get<std::vector<std::string>>();
  s.skew_floor = j.at("skew_floor").get<double>();
  s.validate();
  return s;
}

void NormStats::save(const std::string& path) const {
  std::ofstream out(path);
  out << to_json() << "\n";
  AIRCAST_CHECK(out.good(), IntegrityError, "failed writing " + path);
}

NormStats NormStats::load(const std::string& path) {
  std::ifstream in(path);
  AIRCAST_CHECK(in.good(), IntegrityError, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

std::vector<double> compute_pollutant_scales(const GridPack& pack, int t_begin, int t_end) {
  AIRCAST_CHECK(0 <= t_begin && t_begin < t_end && t_end <= pack.n_times(), RangeError,
                "scale fitting window out of range");
  const int C = pack.manifest().catalog.n_pollutants();
  std::vector<double> mean_max(static_cast<std::size_t>(C), 0.0);
  for (int t = t_begin; t < t_end; ++t) {
    const FieldTensor f = pack.pollutants_at(t);
    std::vector<double> mx(static_cast<std::size_t>(C), 0.0);
    const double* p = f.values.data();
    const std::int64_t cells = f.values.size() / C;
    for (std::int64_t i = 0; i < cells; ++i)
      for (int c = 0; c < C; ++c) mx[static_cast<std::size_t>(c)] = std::max(mx[static_cast<std::size_t>(c)], p[i * C + c]);
    for (int c = 0; c < C; ++c) mean_max[static_cast<std::size_t>(c)] += mx[static_cast<std::size_t>(c)];
  }
  std::vector<double> scales(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    double s = 0.5 * mean_max[static_cast<std::size_t>(c)] / (t_end - t_begin);
    if (s <= 0.0) {
      std::cerr << "warning: variable " << pack.manifest().catalog.pollutant_vars[static_cast<std::size_t>(c)]
                << " is identically zero; using scale 1\n";
      s = 1.0;
    }
    scales[static_cast<std::size_t>(c)] = s;
  }
  return scales;
}

std::vector<std::string> default_skew_vars(const VariableCatalog& catalog) {
  std::vector<std::string> out;
  for (const auto& v : catalog.pollutant_vars) {
    if (v.rfind("tc_no", 0) == 0 || v.rfind("tc_so2", 0) == 0 || v.rfind("no", 0) == 0 ||
        v.rfind("so2", 0) == 0) {
      out.push_back(v);
    }
  }
  return out;
}

NormStats fit_norm_stats(const GridPack& pack, int t_begin, int t_end,
                         std::vector<std::string> skew_vars) {
  const auto& cat = pack.manifest().catalog;
  NormStats s;
  s.pollutant_vars = cat.pollutant_vars;
  s.pollutant_scale = compute_pollutant_scales(pack, t_begin, t_end);
  s.met_vars = cat.met_vars;
  s.skew_vars = std::move(skew_vars);
  for (const auto& v : s.skew_vars) (void)cat.pollutant_index(v);

  const int D = cat.n_met();
  std::vector<double> sum(static_cast<std::size_t>(D), 0.0), sq(static_cast<std::size_t>(D), 0.0);
  std::int64_t n = 0;
  for (int t = t_begin; t < t_end; ++t) {
    const FieldTensor f = pack.meteorology_at(t);
    const double* p = f.values.data();
    const std::int64_t cells = f.values.size() / D;
    for (std::int64_t i = 0; i < cells; ++i) {
      for (int d = 0; d < D; ++d) {
        sum[static_cast<std::size_t>(d)] += p[i * D + d];
        sq[static_cast<std::size_t>(d)] += p[i * D + d] * p[i * D + d];
      }
    }
    n += cells;
  }
  s.met_mean.resize(static_cast<std::size_t>(D));
  s.met_std.resize(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    const double m = sum[static_cast<std::size_t>(d)] / static_cast<double>(n);
    double var = sq[static_cast<std::size_t>(d)] / static_cast<double>(n) - m * m;
    double sd = var > 0.0 ? std::sqrt(var) : 0.0;
    if (sd <= 1e-12) sd = 1.0;  // constant channel carries no signal
    s.met_mean[static_cast<std::size_t>(d)] = m;
    s.met_std[static_cast<std::size_t>(d)] = sd;
  }
  s.validate();
  return s;
}

double skew_transform(double x_norm, double skew_floor) {
  const double x = std::max(x_norm, skew_floor);
  return x + std::log10(x * 2.5e4) / std::log10(25.0);
}

double skew_inverse(double x_trans, double skew_floor) {
  const double lo_val = skew_transform(skew_floor, skew_floor);
  if (x_trans <= lo_val) return skew_floor;

  double lo = skew_floor, hi = std::max(1.0, skew_floor * 2.0);
  while (skew_transform(hi, skew_floor) < x_trans) hi *= 2.0;

  // Bisection; the transform is strictly increasing above the floor.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (skew_transform(mid, skew_floor) < x_trans)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

Tensor pollutants_to_model_space(const Tensor& physical, const NormStats& stats) {
  const int C = physical.dim(2);
  AIRCAST_CHECK(C == static_cast<int>(stats.pollutant_scale.size()), ShapeError,
                "channel count does not match normalization stats");
  Tensor out = physical;
  std::vector<char> skew(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) skew[static_cast<std::size_t>(c)] = stats.is_skewed(c) ? 1 : 0;
  double* p = out.data();
  const std::int64_t cells = out.size() / C;
  for (std::int64_t i = 0; i < cells; ++i) {
    for (int c = 0; c < C; ++c) {
      double v = p[i * C + c] / stats.pollutant_scale[static_cast<std::size_t>(c)];
      if (skew[static_cast<std::size_t>(c)]) v = skew_transform(v, stats.skew_floor);
      p[i * C + c] = v;
    }
  }
  return out;
}

Tensor pollutants_to_physical(const Tensor& model_space, const NormStats& stats) {
  const int C = model_space.dim(2);
  AIRCAST_CHECK(C == static_cast<int>(stats.pollutant_scale.size()), ShapeError,
                "channel count does not match normalization stats");
  Tensor out = model_space;
  std::vector<char> skew(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) skew[static_cast<std::size_t>(c)] = stats.is_skewed(c) ? 1 : 0;
  double* p = out.data();
  const std::int64_t cells = out.size() / C;
  for (std::int64_t i = 0; i < cells; ++i) {
    for (int c = 0; c < C; ++c) {
      double v = p[i * C + c];
      if (skew[static_cast<std::size_t>(c)]) v = skew_inverse(v, stats.skew_floor);
      v *= stats.pollutant_scale[static_cast<std::size_t>(c)];
      p[i * C + c] = std::max(0.0, v);  // concentrations are physically nonnegative
    }
  }
  return out;
}

Tensor met_to_model_space(const Tensor& physical, const NormStats& stats) {
  const int D = physical.dim(2);
  AIRCAST_CHECK(D == static_cast<int>(stats.met_mean.size()), ShapeError,
                "met channel count does not match normalization stats");
  Tensor out = physical;
  double* p = out.data();
  const std::int64_t cells = out.size() / D;
  for (std::int64_t i = 0; i < cells; ++i)
    for (int d = 0; d < D; ++d)
      p[i * D + d] = normalize_met(p[i * D + d], stats.met_mean[static_cast<std::size_t>(d)],
                                   stats.met_std[static_cast<std::size_t>(d)]);
  return out;
}

}  // namespace aircast
