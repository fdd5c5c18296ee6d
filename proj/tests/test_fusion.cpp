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

#include "aircast/fusion.hpp"

#include <cmath>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace aircast;

namespace {

FusionParams random_params(int pc, int mc, int h, int g, int r, std::uint64_t seed) {
  FusionConfig cfg;
  cfg.pollutant_channels = pc;
  cfg.met_channels = mc;
  cfg.hidden_width = h;
  cfg.fused_channels = g;
  cfg.receptive_field = r;
  Rng rng(seed);
  return FusionParams::init(cfg, rng);
}

Tensor random_vec(int n, Rng& rng) {
  Tensor t({n});
  for (int i = 0; i < n; ++i) t[i] = rng.normal();
  return t;
}

Tensor random_field(int h, int w, int c, Rng& rng) {
  Tensor t({h, w, c});
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

Tensor roll_columns(const Tensor& f, int k) {
  const int h = f.dim(0), w = f.dim(1), c = f.dim(2);
  Tensor out({h, w, c});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int ch = 0; ch < c; ++ch) out.at(i, (j + k) % w, ch) = f.at(i, j, ch);
  return out;
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("scalar case: all-ones weights multiply the inputs") {
  FusionConfig cfg{1, 1, 1, 1, 1};
  FusionParams p = FusionParams::from_tensors(cfg, Tensor::full({1, 1}, 1.0),
                                              Tensor::full({1, 1}, 1.0),
                                              Tensor::full({1, 1}, 1.0));
  Tensor pv({1}), qv({1});
  pv[0] = 2.0;
  qv[0] = 3.0;
  CHECK(fuse_pointwise(pv, qv, p)[0] == 6.0);
  CHECK(bilinear_oracle(pv, qv, p)[0] == 6.0);
}

TEST_CASE("zero pollutant vector fuses to zero") {
  FusionParams p = random_params(4, 3, 5, 2, 1, 7);
  Rng rng(8);
  const Tensor q = random_vec(3, rng);
  const Tensor out = fuse_pointwise(Tensor({4}), q, p);
  for (int g = 0; g < 2; ++g) CHECK(out[g] == 0.0);
}

TEST_CASE("bilinearity in each argument") {
  FusionParams p = random_params(4, 3, 5, 2, 1, 9);
  Rng rng(10);
  const Tensor pv = random_vec(4, rng);
  const Tensor qv = random_vec(3, rng);
  const Tensor base = fuse_pointwise(pv, qv, p);
  Tensor pv2 = pv;
  for (int i = 0; i < 4; ++i) pv2[i] *= 3.5;
  const Tensor scaled = fuse_pointwise(pv2, qv, p);
  for (int g = 0; g < 2; ++g)
    CHECK(scaled[g] == doctest::Approx(3.5 * base[g]).epsilon(1e-12));
}

TEST_CASE("rank-1 hidden space matches the oracle exactly") {
  FusionParams p = random_params(3, 4, 1, 2, 1, 11);
  Rng rng(12);
  const Tensor pv = random_vec(3, rng);
  const Tensor qv = random_vec(4, rng);
  const Tensor a = fuse_pointwise(pv, qv, p);
  const Tensor b = bilinear_oracle(pv, qv, p);
  for (int g = 0; g < 2; ++g) CHECK(testing::rel_err(a[g], b[g]) < 1e-12);
}

TEST_CASE("hand-checkable 2x2 expansion") {
  // H=1: out = c * (a1 p1 + a2 p2)(b1 q1 + b2 q2)
  FusionConfig cfg{2, 2, 1, 1, 1};
  Tensor wp({2, 1}), wq({2, 1}), wx({1, 1});
  wp[0] = 1.0;
  wp[1] = 2.0;
  wq[0] = -1.0;
  wq[1] = 0.5;
  wx[0] = 3.0;
  FusionParams p = FusionParams::from_tensors(cfg, wp, wq, wx);
  Tensor pv({2}), qv({2});
  pv[0] = 4.0;
  pv[1] = -1.0;
  qv[0] = 2.0;
  qv[1] = 6.0;
  // (1*4 + 2*-1) = 2;  (-1*2 + 0.5*6) = 1;  3 * 2 * 1 = 6.
  CHECK(fuse_pointwise(pv, qv, p)[0] == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(bilinear_oracle(pv, qv, p)[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("factorized fusion equals the expanded bilinear oracle") {
  Rng seeds(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int pc = 1 + static_cast<int>(seeds.integer(5));
    const int mc = 1 + static_cast<int>(seeds.integer(5));
    const int h = 1 + static_cast<int>(seeds.integer(8));
    const int g = 1 + static_cast<int>(seeds.integer(4));
    FusionParams p = random_params(pc, mc, h, g, 1, 1000 + trial);
    Rng rng(2000 + trial);
    const Tensor pv = random_vec(pc, rng);
    const Tensor qv = random_vec(mc, rng);
    const Tensor a = fuse_pointwise(pv, qv, p);
    const Tensor b = bilinear_oracle(pv, qv, p);
    for (int i = 0; i < g; ++i) CHECK(testing::rel_err(a[i], b[i]) < 1e-6);
  }
}

TEST_CASE("constant fields fuse identically at every cell") {
  FusionParams p = random_params(3, 2, 4, 2, 3, 14);
  Tensor pf = Tensor::full({5, 8, 3}, 0.7);
  Tensor qf = Tensor::full({5, 8, 2}, -0.3);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 8; ++j) pf.at(i, j, c) = 0.2 * (c + 1);
  const Tensor out = fuse_field(pf, qf, p);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 8; ++j)
      for (int g = 0; g < 2; ++g)
        CHECK(out.at(i, j, g) == doctest::Approx(out.at(0, 0, g)).epsilon(1e-12));
}

TEST_CASE("a single nonzero pixel only affects its 3x3 neighbourhood") {
  FusionParams p = random_params(2, 2, 4, 2, 3, 15);
  Rng rng(16);
  const Tensor qf = random_field(6, 9, 2, rng);
  Tensor pf({6, 9, 2});
  pf.at(3, 4, 0) = 1.0;

  const Tensor out = fuse_field(pf, qf, p);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 9; ++j) {
      const bool near = std::abs(i - 3) <= 1 && std::abs(j - 4) <= 1;
      double mag = 0.0;
      for (int g = 0; g < 2; ++g) mag += std::abs(out.at(i, j, g));
      if (!near) CHECK(mag == 0.0);
    }
  }
  // The center actually responds.
  double center = 0.0;
  for (int g = 0; g < 2; ++g) center += std::abs(out.at(3, 4, g));
  CHECK(center > 0.0);
}

TEST_CASE("center-block-only neighbourhood weights reduce to pointwise fusion") {
  const int pc = 3, mc = 2, h = 4, g = 2;
  FusionParams p1 = random_params(pc, mc, h, g, 1, 17);

  // Lift the r=1 weights into the center block of r=3 weights.
  FusionConfig cfg3{pc, mc, h, g, 3};
  Tensor wp3({9 * pc, h}), wq3({9 * mc, h});
  const int center = 4;  // (di=1, dj=1)
  for (int a = 0; a < pc; ++a)
    for (int k = 0; k < h; ++k) wp3.at(center * pc + a, k) = p1.w_p->value.at(a, k);
  for (int b = 0; b < mc; ++b)
    for (int k = 0; k < h; ++k) wq3.at(center * mc + b, k) = p1.w_q->value.at(b, k);
  FusionParams p3 = FusionParams::from_tensors(cfg3, wp3, wq3, p1.w_x->value);

  Rng rng(18);
  const Tensor pf = random_field(5, 8, pc, rng);
  const Tensor qf = random_field(5, 8, mc, rng);
  const Tensor out = fuse_field(pf, qf, p3);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 8; ++j) {
      Tensor pv({pc}), qv({mc});
      for (int c = 0; c < pc; ++c) pv[c] = pf.at(i, j, c);
      for (int c = 0; c < mc; ++c) qv[c] = qf.at(i, j, c);
      const Tensor want = fuse_pointwise(pv, qv, p1);
      for (int c = 0; c < g; ++c)
        CHECK(out.at(i, j, c) == doctest::Approx(want[c]).epsilon(1e-9));
    }
  }
}

TEST_CASE("longitude roll of both inputs rolls the output") {
  FusionParams p = random_params(3, 2, 4, 2, 3, 19);
  Rng rng(20);
  const Tensor pf = random_field(6, 10, 3, rng);
  const Tensor qf = random_field(6, 10, 2, rng);
  const Tensor out = fuse_field(pf, qf, p);
  const int k = 4;
  const Tensor rolled = fuse_field(roll_columns(pf, k), roll_columns(qf, k), p);
  CHECK(testing::max_abs_diff(rolled, roll_columns(out, k)) < 1e-12);
}

TEST_CASE("shape mismatches are rejected") {
  FusionParams p = random_params(3, 2, 4, 2, 3, 21);
  Rng rng(22);
  CHECK_THROWS_AS(fuse_field(random_field(5, 8, 2, rng), random_field(5, 8, 2, rng), p),
                  ShapeError);
  CHECK_THROWS_AS(fuse_field(random_field(5, 8, 3, rng), random_field(4, 8, 2, rng), p),
                  ShapeError);
  FusionParams p1 = random_params(3, 2, 4, 2, 1, 23);
  Tensor bad({2});
  CHECK_THROWS_AS(fuse_pointwise(bad, random_vec(2, rng), p1), ShapeError);
  CHECK_THROWS_AS(fuse_pointwise(random_vec(3, rng), random_vec(2, rng), p), ArgumentError);
}

}  // TEST_SUITE
