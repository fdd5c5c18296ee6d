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

#include "aircast/synthworld.hpp"

#include <algorithm>
#include <cmath>

namespace aircast {

namespace {

// Reflecting row index for pole handling; may bounce more than once.
double reflect_row(double i, int n_lat) {
  const double top = static_cast<double>(n_lat - 1);
  while (i < 0.0 || i > top) {
    if (i < 0.0) i = -i;
    if (i > top) i = 2.0 * top - i;
  }
  return i;
}

int wrap_col(int j, int n_lon) {
  j %= n_lon;
  return j < 0 ? j + n_lon : j;
}

// Bilinear sample with periodic longitude and reflecting latitude.
double sample_bilinear(const Tensor& f, double i, double j, int c) {
  const int n_lat = f.dim(0), n_lon = f.dim(1);
  i = reflect_row(i, n_lat);
  const int i0 = std::min(static_cast<int>(std::floor(i)), n_lat - 1);
  const int i1 = std::min(i0 + 1, n_lat - 1);
  const double fi = i - i0;
  const double j0f = std::floor(j);
  const int j0 = wrap_col(static_cast<int>(j0f), n_lon);
  const int j1 = wrap_col(j0 + 1, n_lon);
  const double fj = j - j0f;
  const double v00 = f.at(i0, j0, c), v01 = f.at(i0, j1, c);
  const double v10 = f.at(i1, j0, c), v11 = f.at(i1, j1, c);
  return (1.0 - fi) * ((1.0 - fj) * v00 + fj * v01) + fi * ((1.0 - fj) * v10 + fj * v11);
}

// Smooth random field built from a few large-scale harmonics, unit variance.
Tensor smooth_field(const GridSpec& g, Rng& rng, int n_modes, int max_wavenumber) {
  Tensor f({g.n_lat, g.n_lon, 1});
  for (int m = 0; m < n_modes; ++m) {
    const double amp = rng.normal();
    const int k_lon = 1 + static_cast<int>(rng.integer(static_cast<std::uint64_t>(max_wavenumber)));
    const int k_lat = static_cast<int>(rng.integer(static_cast<std::uint64_t>(max_wavenumber + 1)));
    const double ph_lon = rng.uniform(0.0, 2.0 * M_PI);
    const double ph_lat = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 0; i < g.n_lat; ++i) {
      const double a = std::cos(M_PI * k_lat * i / (g.n_lat - 1) + ph_lat);
      for (int j = 0; j < g.n_lon; ++j) {
        f.at(i, j, 0) += amp * a * std::cos(2.0 * M_PI * k_lon * j / g.n_lon + ph_lon);
      }
    }
  }
  double mean = 0.0, sq = 0.0;
  for (std::int64_t i = 0; i < f.size(); ++i) mean += f[i];
  mean /= static_cast<double>(f.size());
  for (std::int64_t i = 0; i < f.size(); ++i) {
    f[i] -= mean;
    sq += f[i] * f[i];
  }
  const double sd = std::sqrt(sq / static_cast<double>(f.size()));
  if (sd > 0.0)
    for (std::int64_t i = 0; i < f.size(); ++i) f[i] /= sd;
  return f;
}

struct WindState {
  Tensor u, v;            // (M,N,1) cells/step
  Tensor xi_u, xi_v;      // stochastic components
  Tensor noise_a, noise_b;
  int step_count = 0;
};

void wind_step(WindState& ws, const WorldConfig& cfg, Rng& rng) {
  const GridSpec& g = cfg.grid;
  const double rho = cfg.gust_persistence;
  const double fresh = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  auto ar1 = [&](Tensor& xi) {
    Tensor f = smooth_field(g, rng, 6, 3);
    for (std::int64_t i = 0; i < xi.size(); ++i) xi[i] = rho * xi[i] + fresh * f[i];
  };
  ar1(ws.xi_u);
  ar1(ws.xi_v);
  ar1(ws.noise_a);
  ar1(ws.noise_b);

  const int n = ws.step_count++;
  for (int i = 0; i < g.n_lat; ++i) {
    const double coslat = std::cos(latitude_of(i, g) * M_PI / 180.0);
    for (int j = 0; j < g.n_lon; ++j) {
      double u = 0.0, v = 0.0;
      switch (cfg.wind_regime) {
        case WindRegime::kZonal:
          u = cfg.mean_zonal_speed;
          break;
        case WindRegime::kRotating: {
          const double a = 2.0 * M_PI * n / 20.0;
          u = cfg.mean_zonal_speed + cfg.gust_speed * std::cos(a);
          v = cfg.gust_speed * std::sin(a);
          break;
        }
        case WindRegime::kStochasticMix:
          u = cfg.mean_zonal_speed * coslat + cfg.gust_speed * ws.xi_u.at(i, j, 0);
          v = cfg.gust_speed * ws.xi_v.at(i, j, 0);
          break;
      }
      ws.u.at(i, j, 0) = u;
      ws.v.at(i, j, 0) = v;
    }
  }
}

void add_source(Tensor& field, const GridSpec& g, const PointSource& s, int channel) {
  const double i0 = (90.0 - s.lat_deg) / g.resolution_deg;
  const double j0 = s.lon_deg / g.resolution_deg;
  const double inv2s2 = 1.0 / (2.0 * s.sigma_cells * s.sigma_cells);
  for (int i = 0; i < g.n_lat; ++i) {
    for (int j = 0; j < g.n_lon; ++j) {
      double dj = std::abs(j - j0);
      dj = std::min(dj, g.n_lon - dj);  // periodic longitude distance
      const double di = i - i0;
      field.at(i, j, channel) += s.strength * std::exp(-(di * di + dj * dj) * inv2s2);
    }
  }
}

}  // namespace

WindRegime wind_regime_from_string(const std::string& s) {
  if (s == "zonal") return WindRegime::kZonal;
  if (s == "rotating") return WindRegime::kRotating;
  if (s == "stochastic-mix") return WindRegime::kStochasticMix;
  throw ConfigError("unknown wind regime: " + s);
}

std::string to_string(WindRegime r) {
  switch (r) {
    case WindRegime::kZonal: return "zonal";
    case WindRegime::kRotating: return "rotating";
    case WindRegime::kStochasticMix: return "stochastic-mix";
  }
  return "?";
}

void WorldConfig::validate() const {
  catalog.validate();
  AIRCAST_CHECK(n_steps >= 1, ConfigError, "world needs at least one step");
  AIRCAST_CHECK(diffusion_coeff >= 0.0 && diffusion_coeff <= 0.25, ConfigError,
                "diffusion_coeff must lie in [0, 0.25] for stable explicit stepping");
  AIRCAST_CHECK(decay_rate.size() == static_cast<std::size_t>(catalog.n_pollutants()),
                ConfigError, "decay_rate needs one entry per pollutant variable");
  for (double d : decay_rate)
    AIRCAST_CHECK(d >= 0.0 && d < 1.0, ConfigError, "decay_rate entries must lie in [0, 1)");
  for (const auto& v : photo_vars) (void)catalog.pollutant_index(v);
  for (const auto& s : sources) (void)catalog.pollutant_index(s.variable);
}

double solar_zenith_cos(UtcTime t, double lat_deg, double lon_deg) {
  AIRCAST_CHECK(lat_deg >= -90.0 && lat_deg <= 90.0, ArgumentError, "latitude out of range");
  const double doy = static_cast<double>(day_of_year(t));
  // Declination via the standard 23.45 deg sine approximation.
  const double decl = 23.45 * M_PI / 180.0 * std::sin(2.0 * M_PI * (284.0 + doy + 1.0) / 365.0);
  const double solar_hour = hour_of_day(t) + lon_deg / 15.0;
  const double hour_angle = (solar_hour - 12.0) * M_PI / 12.0;
  const double lat = lat_deg * M_PI / 180.0;
  return std::sin(decl) * std::sin(lat) + std::cos(decl) * std::cos(lat) * std::cos(hour_angle);
}

Tensor advect_semi_lagrangian(const Tensor& field, const Tensor& wind_u, const Tensor& wind_v) {
  AIRCAST_CHECK(field.ndim() == 3 && wind_u.ndim() == 3 && wind_v.ndim() == 3, ShapeError,
                "advection expects rank-3 tensors");
  AIRCAST_CHECK(field.dim(0) == wind_u.dim(0) && field.dim(1) == wind_u.dim(1) &&
                    wind_u.same_shape(wind_v),
                ShapeError, "wind grids do not match field");
  const int n_lat = field.dim(0), n_lon = field.dim(1), nc = field.dim(2);
  Tensor out({n_lat, n_lon, nc});
  for (int i = 0; i < n_lat; ++i) {
    for (int j = 0; j < n_lon; ++j) {
      // u > 0 blows east (increasing j); v > 0 blows north (decreasing i,
      // row 0 being the north pole). Backtrack to the departure point.
      const double dep_i = i + wind_v.at(i, j, 0);
      const double dep_j = j - wind_u.at(i, j, 0);
      for (int c = 0; c < nc; ++c) out.at(i, j, c) = sample_bilinear(field, dep_i, dep_j, c);
    }
  }
  return out;
}

Tensor diffuse_explicit(const Tensor& field, double coeff) {
  const int n_lat = field.dim(0), n_lon = field.dim(1), nc = field.dim(2);
  Tensor out({n_lat, n_lon, nc});
  for (int i = 0; i < n_lat; ++i) {
    const int in = (i == 0) ? 1 : i - 1;  // mirror at the poles
    const int is = (i == n_lat - 1) ? n_lat - 2 : i + 1;
    for (int j = 0; j < n_lon; ++j) {
      const int jw = wrap_col(j - 1, n_lon);
      const int je = wrap_col(j + 1, n_lon);
      for (int c = 0; c < nc; ++c) {
        const double lap = field.at(in, j, c) + field.at(is, j, c) + field.at(i, jw, c) +
                           field.at(i, je, c) - 4.0 * field.at(i, j, c);
        out.at(i, j, c) = field.at(i, j, c) + coeff * lap;
      }
    }
  }
  return out;
}

WorldConfig WorldConfig::verification_default(std::uint64_t seed, int n_steps) {
  WorldConfig cfg;
  cfg.grid = GridSpec::desk_scale();
  cfg.catalog = VariableCatalog::synthetic_default();
  cfg.n_steps = n_steps;
  cfg.seed = seed;
  cfg.wind_regime = WindRegime::kStochasticMix;
  cfg.mean_zonal_speed = 0.4;
  cfg.gust_speed = 0.9;
  cfg.gust_persistence = 0.85;
  cfg.diffusion_coeff = 0.05;
  cfg.decay_rate = {0.03, 0.01, 0.0};  // plume, blob, photo
  cfg.photo_vars = {"photo"};
  cfg.photo_production = 0.5;
  cfg.photo_decay = 0.1;

  const struct {
    double lat, lon, strength, sigma;
  } plume_src[] = {{52, 12, 1.0, 1.5}, {38, 250, 1.0, 1.5}, {10, 80, 0.8, 1.5},
                   {-12, 300, 0.9, 1.5}, {-33, 150, 0.7, 1.5}, {47, 200, 0.8, 1.5}};
  for (const auto& s : plume_src)
    cfg.sources.push_back({s.lat, s.lon, s.strength, s.sigma, "plume"});
  const struct {
    double lat, lon, strength, sigma;
  } blob_src[] = {{40, 40, 0.25, 6.0}, {-20, 130, 0.25, 6.0}, {25, 230, 0.2, 7.0},
                  {-45, 320, 0.2, 6.0}};
  for (const auto& s : blob_src)
    cfg.sources.push_back({s.lat, s.lon, s.strength, s.sigma, "blob"});
  return cfg;
}

PackData generate_world(const WorldConfig& config) {
  config.validate();
  const GridSpec& g = config.grid;
  const int C = config.catalog.n_pollutants();

  Rng master(config.seed);
  Rng init_rng = master.fork(1);
  Rng wind_rng = master.fork(2);
  Rng static_rng = master.fork(3);

  // Static channels.
  Tensor statics({g.n_lat, g.n_lon, config.catalog.n_static()});
  {
    Tensor oro = smooth_field(g, static_rng, 8, 4);
    Tensor lsm = smooth_field(g, static_rng, 8, 4);
    for (int i = 0; i < g.n_lat; ++i) {
      const double lat = latitude_of(i, g);
      for (int j = 0; j < g.n_lon; ++j) {
        const double lon = longitude_of(j, g);
        statics.at(i, j, 0) = std::max(0.0, oro.at(i, j, 0));        // orography
        statics.at(i, j, 1) = lsm.at(i, j, 0) > 0.0 ? 1.0 : 0.0;     // land-sea mask
        statics.at(i, j, 2) = lat / 90.0;                            // normalized latitude
        statics.at(i, j, 3) = std::sin(lon * M_PI / 180.0);
        statics.at(i, j, 4) = std::cos(lon * M_PI / 180.0);
      }
    }
  }

  // Initial pollutants: tracers start from broad random bumps, photochemical
  // variables spin up during burn-in.
  Tensor pol({g.n_lat, g.n_lon, C});
  for (int c = 0; c < C; ++c) {
    Tensor f = smooth_field(g, init_rng, 6, 3);
    for (int i = 0; i < g.n_lat; ++i)
      for (int j = 0; j < g.n_lon; ++j)
        pol.at(i, j, c) = 0.3 * std::max(0.0, f.at(i, j, 0));
  }

  WindState ws{Tensor({g.n_lat, g.n_lon, 1}), Tensor({g.n_lat, g.n_lon, 1}),
               smooth_field(g, wind_rng, 6, 3), smooth_field(g, wind_rng, 6, 3),
               smooth_field(g, wind_rng, 6, 3), smooth_field(g, wind_rng, 6, 3)};

  std::vector<int> photo_idx;
  for (const auto& v : config.photo_vars) photo_idx.push_back(config.catalog.pollutant_index(v));

  const int burn_in = config.photo_vars.empty() ? 0 : 24;
  const UtcTime sim_start = config.start_time - static_cast<UtcTime>(burn_in) * kStepSeconds;

  PackData out;
  out.grid = g;
  out.catalog = config.catalog;
  out.statics = statics;

  auto record_met = [&](UtcTime /*t*/) {
    Tensor met({g.n_lat, g.n_lon, config.catalog.n_met()});
    for (int i = 0; i < g.n_lat; ++i) {
      for (int j = 0; j < g.n_lon; ++j) {
        met.at(i, j, 0) = ws.u.at(i, j, 0);
        met.at(i, j, 1) = ws.v.at(i, j, 0);
        met.at(i, j, 2) = ws.noise_a.at(i, j, 0);
        met.at(i, j, 3) = ws.noise_b.at(i, j, 0);
      }
    }
    return met;
  };

  // Wind valid at the simulation start.
  wind_step(ws, config, wind_rng);

  auto step_pollutants = [&](UtcTime arrival_time) {
    Tensor next = advect_semi_lagrangian(pol, ws.u, ws.v);
    if (config.diffusion_coeff > 0.0) next = diffuse_explicit(next, config.diffusion_coeff);
    for (int c = 0; c < C; ++c) {
      const double keep = 1.0 - config.decay_rate[static_cast<std::size_t>(c)];
      if (keep < 1.0)
        for (int i = 0; i < g.n_lat; ++i)
          for (int j = 0; j < g.n_lon; ++j) next.at(i, j, c) *= keep;
    }
    for (const auto& s : config.sources)
      add_source(next, g, s, config.catalog.pollutant_index(s.variable));
    for (int c : photo_idx) {
      const double keep = 1.0 - config.photo_decay;
      for (int i = 0; i < g.n_lat; ++i) {
        const double lat = latitude_of(i, g);
        for (int j = 0; j < g.n_lon; ++j) {
          const double sun = std::max(0.0, solar_zenith_cos(arrival_time, lat, longitude_of(j, g)));
          next.at(i, j, c) = next.at(i, j, c) * keep + config.photo_production * sun;
        }
      }
    }
    pol = std::move(next);
  };

  for (int k = 0; k < burn_in; ++k) {
    const UtcTime arrival = sim_start + static_cast<UtcTime>(k + 1) * kStepSeconds;
    wind_step(ws, config, wind_rng);
    step_pollutants(arrival);
  }

  // Record step 0 state, then march forward.
  out.times.push_back(config.start_time);
  out.pollutants.push_back(pol);
  out.meteorology.push_back(record_met(config.start_time));
  for (int k = 1; k < config.n_steps; ++k) {
    const UtcTime t = config.start_time + static_cast<UtcTime>(k) * kStepSeconds;
    wind_step(ws, config, wind_rng);
    step_pollutants(t);
    out.times.push_back(t);
    out.pollutants.push_back(pol);
    out.meteorology.push_back(record_met(t));
  }
  return out;
}

}  // namespace aircast
