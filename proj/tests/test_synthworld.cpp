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

#include <cmath>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace aircast;

namespace {

Tensor impulse(const GridSpec& g, int i, int j, double v = 1.0) {
  Tensor f({g.n_lat, g.n_lon, 1});
  f.at(i, j, 0) = v;
  return f;
}

Tensor uniform_wind(const GridSpec& g, double u) {
  Tensor w({g.n_lat, g.n_lon, 1});
  for (std::int64_t i = 0; i < w.size(); ++i) w[i] = u;
  return w;
}

double channel_sum(const Tensor& f, int c) {
  double s = 0.0;
  for (int i = 0; i < f.dim(0); ++i)
    for (int j = 0; j < f.dim(1); ++j) s += f.at(i, j, c);
  return s;
}

double weighted_mass(const Tensor& f, int c, const std::vector<double>& w) {
  double s = 0.0;
  for (int i = 0; i < f.dim(0); ++i)
    for (int j = 0; j < f.dim(1); ++j) s += f.at(i, j, c) * w[static_cast<std::size_t>(i)];
  return s;
}

WorldConfig quiet_config(const GridSpec& g, int n_steps) {
  WorldConfig cfg;
  cfg.grid = g;
  cfg.catalog = testing::tiny_catalog();
  cfg.n_steps = n_steps;
  cfg.seed = 5;
  cfg.wind_regime = WindRegime::kZonal;
  cfg.mean_zonal_speed = 0.0;
  cfg.gust_speed = 0.0;
  cfg.diffusion_coeff = 0.0;
  cfg.decay_rate = {0.0, 0.0, 0.0};
  cfg.photo_vars = {};  // no burn-in, no solar forcing
  return cfg;
}

}  // namespace

TEST_SUITE("synthworld") {

TEST_CASE("semi-Lagrangian advection shifts an impulse by exactly one cell per step") {
  const GridSpec g(9, 16);
  const Tensor u = uniform_wind(g, 1.0);
  const Tensor v = uniform_wind(g, 0.0);
  Tensor f = impulse(g, 4, 5);
  for (int step = 1; step <= 14; ++step) {
    f = advect_semi_lagrangian(f, u, v);
    const int expect_j = (5 + step) % 16;  // periodic longitude
    CHECK(f.at(4, expect_j, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(channel_sum(f, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("northward wind moves content toward lower row indices") {
  const GridSpec g(9, 16);
  const Tensor u = uniform_wind(g, 0.0);
  const Tensor v = uniform_wind(g, 1.0);
  Tensor f = impulse(g, 4, 5);
  f = advect_semi_lagrangian(f, u, v);
  CHECK(f.at(3, 5, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fractional displacement splits mass bilinearly") {
  const GridSpec g(9, 16);
  const Tensor u = uniform_wind(g, 0.5);
  const Tensor v = uniform_wind(g, 0.0);
  Tensor f = impulse(g, 4, 5);
  f = advect_semi_lagrangian(f, u, v);
  CHECK(f.at(4, 5, 0) == doctest::Approx(0.5));
  CHECK(f.at(4, 6, 0) == doctest::Approx(0.5));
}

TEST_CASE("explicit diffusion spreads an impulse and conserves interior mass") {
  const GridSpec g(9, 16);
  Tensor f = impulse(g, 4, 8, 1.0);
  const Tensor d = diffuse_explicit(f, 0.25);
  CHECK(d.at(4, 8, 0) == doctest::Approx(0.0));
  CHECK(d.at(4, 7, 0) == doctest::Approx(0.25));
  CHECK(d.at(4, 9, 0) == doctest::Approx(0.25));
  CHECK(d.at(3, 8, 0) == doctest::Approx(0.25));
  CHECK(d.at(5, 8, 0) == doctest::Approx(0.25));
  CHECK(channel_sum(d, 0) == doctest::Approx(1.0).epsilon(1e-12));

  const Tensor id = diffuse_explicit(f, 0.0);
  CHECK(testing::max_abs_diff(id, f) == 0.0);
}

TEST_CASE("zero dynamics leaves the world constant in time") {
  const WorldConfig cfg = quiet_config(GridSpec(9, 16), 6);
  const PackData world = generate_world(cfg);
  for (int t = 1; t < 6; ++t)
    CHECK(testing::max_abs_diff(world.pollutants[static_cast<std::size_t>(t)],
                                world.pollutants[0]) == 0.0);
}

TEST_CASE("pure exponential decay matches the closed form") {
  WorldConfig cfg = quiet_config(GridSpec(9, 16), 10);
  cfg.decay_rate = {0.1, 0.1, 0.1};
  const PackData world = generate_world(cfg);
  const double m0 = channel_sum(world.pollutants[0], 1);
  REQUIRE(m0 > 0.0);
  for (int t = 1; t < 10; ++t) {
    const double ratio = channel_sum(world.pollutants[static_cast<std::size_t>(t)], 1) /
                         channel_sum(world.pollutants[static_cast<std::size_t>(t - 1)], 1);
    CHECK(ratio == doctest::Approx(0.9).epsilon(1e-9));
  }
  // Half-life of the per-step factor: ln 2 / ln(1/0.9) = 6.58 steps.
  const double half_life = std::log(2.0) / -std::log(0.9);
  CHECK(half_life == doctest::Approx(6.58).epsilon(0.01));
  const double m6 = channel_sum(world.pollutants[6], 1);
  const double m7 = channel_sum(world.pollutants[7], 1);
  CHECK(m6 / m0 > 0.5);
  CHECK(m7 / m0 < 0.5);
}

TEST_CASE("a point source feeds a downwind plume") {
  WorldConfig cfg = quiet_config(GridSpec(16, 30), 20);
  cfg.wind_regime = WindRegime::kZonal;
  cfg.mean_zonal_speed = 1.0;
  cfg.decay_rate = {0.1, 0.0, 0.0};
  cfg.sources.push_back({latitude_of(8, cfg.grid), longitude_of(5, cfg.grid), 1.0, 1.0, "a"});
  const PackData world = generate_world(cfg);

  const Tensor& last = world.pollutants.back();
  // Mass within the 6 columns east of the source must dominate the 6 west.
  double east = 0.0, west = 0.0;
  for (int i = 0; i < 16; ++i) {
    for (int k = 1; k <= 6; ++k) {
      east += last.at(i, (5 + k) % 30, 0);
      west += last.at(i, (5 - k + 30) % 30, 0);
    }
  }
  CHECK(east > 3.0 * west);
  // Total mass approaches source strength / decay equilibrium, so it grows.
  CHECK(channel_sum(last, 0) > channel_sum(world.pollutants[2], 0));
}

TEST_CASE("solar zenith cosine at the equinox") {
  const UtcTime noon = utc_from_civil({2022, 3, 20, 12, 0, 0});
  CHECK(solar_zenith_cos(noon, 0.0, 0.0) == doctest::Approx(1.0).epsilon(0.01));
  const UtcTime midnight = utc_from_civil({2022, 3, 20, 0, 0, 0});
  CHECK(solar_zenith_cos(midnight, 0.0, 0.0) == doctest::Approx(-1.0).epsilon(0.01));
  // 06:00 local at 45N sits near the terminator.
  const UtcTime six = utc_from_civil({2022, 3, 20, 6, 0, 0});
  CHECK(std::abs(solar_zenith_cos(six, 45.0, 0.0)) < 0.08);
  // Local noon shifts with longitude: 90E keeps the sun overhead at 06 UTC.
  CHECK(solar_zenith_cos(six, 0.0, 90.0) == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(solar_zenith_cos(noon, 95.0, 0.0), ArgumentError);
}

TEST_CASE("advection plus diffusion conserves weighted mass within 1 percent over 20 steps") {
  WorldConfig cfg = quiet_config(GridSpec(16, 30), 21);
  cfg.wind_regime = WindRegime::kRotating;
  cfg.mean_zonal_speed = 0.3;
  cfg.gust_speed = 0.3;
  cfg.diffusion_coeff = 0.05;
  const PackData world = generate_world(cfg);
  const auto w = latitude_weights(cfg.grid).w;
  for (int c = 0; c < 3; ++c) {
    const double m0 = weighted_mass(world.pollutants[0], c, w);
    REQUIRE(m0 > 0.0);
    const double m20 = weighted_mass(world.pollutants[20], c, w);
    CHECK(std::abs(m20 - m0) / m0 < 0.01);
  }
}

TEST_CASE("photochemical tendency tracks the terminator") {
  WorldConfig cfg = WorldConfig::verification_default(3, 50);
  cfg.grid = GridSpec(16, 30);
  cfg.catalog = testing::tiny_catalog();
  cfg.decay_rate = {0.03, 0.01, 0.0};
  cfg.sources.clear();
  const PackData world = generate_world(cfg);
  const int photo = cfg.catalog.pollutant_index("photo");

  // Correlate the step-to-step tendency with daylight at the arrival time.
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  std::int64_t n = 0;
  for (int t = 10; t < 50; ++t) {
    const Tensor& prev = world.pollutants[static_cast<std::size_t>(t - 1)];
    const Tensor& cur = world.pollutants[static_cast<std::size_t>(t)];
    for (int i = 0; i < cfg.grid.n_lat; ++i) {
      const double lat = latitude_of(i, cfg.grid);
      for (int j = 0; j < cfg.grid.n_lon; ++j) {
        const double x = std::max(
            0.0, solar_zenith_cos(world.times[static_cast<std::size_t>(t)], lat,
                                  longitude_of(j, cfg.grid)));
        const double y = cur.at(i, j, photo) - prev.at(i, j, photo);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        ++n;
      }
    }
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double corr = cov / std::sqrt((sxx / n - (sx / n) * (sx / n)) *
                                      (syy / n - (sy / n) * (sy / n)));
  CHECK(corr > 0.5);
}

TEST_CASE("identical seeds give bit-identical worlds") {
  const WorldConfig cfg = WorldConfig::verification_default(12, 20);
  const PackData a = generate_world(cfg);
  const PackData b = generate_world(cfg);
  for (std::size_t t = 0; t < a.pollutants.size(); ++t) {
    CHECK(testing::max_abs_diff(a.pollutants[t], b.pollutants[t]) == 0.0);
    CHECK(testing::max_abs_diff(a.meteorology[t], b.meteorology[t]) == 0.0);
  }
  WorldConfig other = cfg;
  other.seed = 13;
  const PackData c = generate_world(other);
  CHECK(testing::max_abs_diff(a.pollutants[5], c.pollutants[5]) > 0.0);
}

TEST_CASE("unstable diffusion settings are rejected") {
  WorldConfig cfg = quiet_config(GridSpec(9, 16), 3);
  cfg.diffusion_coeff = 0.3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.diffusion_coeff = 0.1;
  cfg.decay_rate = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // TEST_SUITE
