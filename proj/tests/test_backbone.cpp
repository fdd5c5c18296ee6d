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

#include "aircast/backbone.hpp"

#include <cmath>

#include "aircast/model.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace aircast;

namespace {

ModelConfig tiny_config(int in_ch = 4, int out_ch = 2) {
  ModelConfig cfg;
  cfg.in_channels = in_ch;
  cfg.out_channels = out_ch;
  cfg.base_width = 4;
  cfg.n_hidden_blocks = 1;
  cfg.hidden_kernel = 5;
  cfg.mlp_expansion = 2;
  cfg.time_embed_dim = 8;
  return cfg;
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

TEST_SUITE("backbone") {

TEST_CASE("time embedding phases") {
  const UtcTime jan1 = utc_from_civil({2022, 1, 1, 0, 0, 0});
  const Tensor e0 = time_embed(jan1);
  CHECK(e0[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e0[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(e0[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e0[3] == doctest::Approx(0.0).epsilon(1e-12));

  const Tensor noon = time_embed(utc_from_civil({2022, 1, 1, 12, 0, 0}));
  CHECK(noon[2] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::abs(noon[3]) < 1e-9);

  // Day 183 of the year sits half a cycle through the 366-day wavelength.
  const Tensor midyear = time_embed(utc_from_civil({2022, 7, 3, 0, 0, 0}));
  CHECK(day_of_year(utc_from_civil({2022, 7, 3, 0, 0, 0})) == 183);
  CHECK(midyear[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::abs(midyear[1]) < 1e-6);

  for (int i = 0; i < 4; ++i) {
    CHECK(midyear[i] >= -1.0);
    CHECK(midyear[i] <= 1.0);
  }

  // Literal form without the full-circle factor never completes a cycle.
  const Tensor literal = time_embed(utc_from_civil({2022, 7, 3, 0, 0, 0}), 1.0);
  CHECK(literal[0] == doctest::Approx(std::cos(183.0 / 366.0)).epsilon(1e-12));
}

TEST_CASE("pad_to_multiple and crop_to round trip") {
  Rng rng(30);
  const Tensor full = random_field(451, 900, 2, rng);

  SUBCASE("operational grid pads to 464 x 912") {
    const PaddedField p = pad_to_multiple(full, 16);
    CHECK(p.values.dim(0) == 464);
    CHECK(p.values.dim(1) == 912);
    CHECK(p.orig_h == 451);
    CHECK(p.orig_w == 900);
    const Tensor back = crop_to(p.values, 451, 900);
    CHECK(testing::max_abs_diff(back, full) == 0.0);
    // Wrapped columns and replicated rows.
    CHECK(p.values.at(10, 905, 0) == full.at(10, 5, 0));
    CHECK(p.values.at(460, 10, 1) == full.at(450, 10, 1));
  }

  SUBCASE("already divisible sizes pass through") {
    const Tensor ok = random_field(64, 128, 3, rng);
    const PaddedField p = pad_to_multiple(ok, 16);
    CHECK(testing::max_abs_diff(p.values, ok) == 0.0);
  }
}

TEST_CASE("forward emits two heads at the input resolution") {
  const ModelConfig cfg = tiny_config();
  Rng rng(31);
  const UNet net(cfg, rng);
  const Tensor x = random_field(32, 64, cfg.in_channels, rng);
  const Tensor emb = time_embed(utc_from_civil({2022, 6, 1, 12, 0, 0}));
  auto [psi, delta] = net.forward(ad::constant(x), emb);
  CHECK(psi->value.shape() == std::vector<int>{32, 64, 2});
  CHECK(delta->value.shape() == std::vector<int>{32, 64, 2});
  CHECK(all_finite(psi->value));
  CHECK(all_finite(delta->value));
}

TEST_CASE("fresh heads start as the identity map") {
  const ModelConfig cfg = tiny_config();
  Rng rng(32);
  const UNet net(cfg, rng);
  const Tensor x = random_field(16, 32, cfg.in_channels, rng);
  auto [psi, delta] = net.forward(ad::constant(x), time_embed(0));
  for (std::int64_t i = 0; i < psi->value.size(); ++i) {
    CHECK(psi->value[i] == 1.0);
    CHECK(delta->value[i] == 0.0);
  }
}

TEST_CASE("unpadded input is rejected") {
  const ModelConfig cfg = tiny_config();
  Rng rng(33);
  const UNet net(cfg, rng);
  const Tensor bad = random_field(30, 60, cfg.in_channels, rng);
  CHECK_THROWS_AS(net.forward(ad::constant(bad), time_embed(0)), ShapeError);
  const Tensor wrong_ch = random_field(32, 64, cfg.in_channels + 1, rng);
  CHECK_THROWS_AS(net.forward(ad::constant(wrong_ch), time_embed(0)), ShapeError);
}

TEST_CASE("identical seeds build identical networks") {
  const ModelConfig cfg = tiny_config();
  Rng r1(34), r2(34);
  const UNet a(cfg, r1), b(cfg, r2);
  Rng rx(35);
  const Tensor x = random_field(16, 32, cfg.in_channels, rx);
  const Tensor emb = time_embed(12345 * 3600);
  auto [pa, da] = a.forward(ad::constant(x), emb);
  auto [pb, db] = b.forward(ad::constant(x), emb);
  CHECK(testing::max_abs_diff(pa->value, pb->value) == 0.0);
  CHECK(testing::max_abs_diff(da->value, db->value) == 0.0);
}

TEST_CASE("longitude roll equivariance on an aligned roll") {
  ModelConfig cfg = tiny_config();
  Rng rng(36);
  UNet net(cfg, rng);
  // Randomize the heads so the outputs carry structure.
  for (auto& [name, p] : net.named_params()) {
    if (name.rfind("head.", 0) == 0)
      for (std::int64_t i = 0; i < p->value.size(); ++i) p->value[i] = 0.3 * rng.normal();
  }
  const Tensor x = random_field(32, 64, cfg.in_channels, rng);
  const Tensor emb = time_embed(7777 * 7200);
  const int k = 16;  // aligned with every downsampling level
  auto [psi, delta] = net.forward(ad::constant(x), emb);
  auto [psi_r, delta_r] = net.forward(ad::constant(roll_columns(x, k)), emb);
  CHECK(testing::max_abs_diff(psi_r->value, roll_columns(psi->value, k)) < 1e-5);
  CHECK(testing::max_abs_diff(delta_r->value, roll_columns(delta->value, k)) < 1e-5);
}

TEST_CASE("parameter inventory matches allocation") {
  const ModelConfig cfg = tiny_config();
  Rng rng(37);
  const UNet net(cfg, rng);
  std::int64_t total = 0;
  for (const auto& [name, p] : net.named_params()) total += p->value.size();
  CHECK(total == count_parameters(cfg));
}

TEST_CASE("operational-scale default stays within the parameter budget") {
  const ModelConfig cfg = ModelConfig::full_scale_default();
  const FusionConfig fcfg =
      fusion_config_for(VariableCatalog::cams_default(), 512, cfg.in_channels, 3);
  const std::int64_t total = count_parameters_total(fcfg, cfg);
  MESSAGE("full-scale parameter count: ", total);
  CHECK(total <= 260'000'000);
  CHECK(total >= 140'000'000);
}

TEST_CASE("backbone gradients match finite differences on a sampled subset") {
  ModelConfig cfg = tiny_config(3, 2);
  cfg.base_width = 3;
  cfg.time_embed_dim = 4;
  Rng rng(38);
  UNet net(cfg, rng);
  const Tensor x = random_field(16, 16, cfg.in_channels, rng);
  const Tensor probe_psi = random_field(16, 16, 2, rng);
  const Tensor probe_delta = random_field(16, 16, 2, rng);
  const Tensor emb = time_embed(86400 * 200 + 3600 * 6);

  auto eval = [&]() {
    auto [psi, delta] = net.forward(ad::constant(x), emb);
    return ad::add(ad::mean_all(ad::mul(psi, ad::constant(probe_psi))),
                   ad::mean_all(ad::mul(delta, ad::constant(probe_delta))));
  };

  ad::Var root = eval();
  ad::backward(root);

  Rng pick(39);
  double worst = 0.0;
  for (auto& [name, p] : net.named_params()) {
    for (int s = 0; s < 3; ++s) {
      const std::int64_t i = static_cast<std::int64_t>(
          pick.integer(static_cast<std::uint64_t>(p->value.size())));
      const double orig = p->value[i];
      const double h = 1e-6 * std::max(1.0, std::abs(orig));
      double fp, fm;
      {
        ad::NoGradGuard ng;
        p->value[i] = orig + h;
        fp = eval()->value[0];
        p->value[i] = orig - h;
        fm = eval()->value[0];
        p->value[i] = orig;
      }
      const double fd = (fp - fm) / (2.0 * h);
      const double an = p->grad.empty() ? 0.0 : p->grad[i];
      worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("checkpoint round trip preserves the model") {
  testing::TempDir tmp("ckpt");
  NormStats stats;
  stats.pollutant_vars = {"a", "b"};
  stats.pollutant_scale = {1.5, 2.0};
  stats.met_vars = {"u", "v"};
  stats.met_mean = {0.0, 0.1};
  stats.met_std = {1.0, 2.0};
  stats.skew_vars = {"a"};

  FusionConfig fcfg{2 * 2 + 1, 2 * 2, 6, 4, 3};
  const ModelConfig mcfg = tiny_config(4, 2);
  const CoupledModel model(fcfg, mcfg, stats, 77);
  // Perturb a head so the checkpoint differs from a fresh init.
  auto params = model.named_params();
  for (auto& [name, p] : params)
    if (name == "head.psi.w") p->value[0] = 0.25;
  model.save_checkpoint(tmp.sub("model.ckpt"));

  const CoupledModel loaded = CoupledModel::load_checkpoint(tmp.sub("model.ckpt"));
  CHECK(loaded.unet_config().base_width == mcfg.base_width);
  CHECK(loaded.norm_stats().pollutant_scale == stats.pollutant_scale);
  auto lparams = loaded.named_params();
  REQUIRE(lparams.size() == params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK(lparams[i].first == params[i].first);
    CHECK(testing::max_abs_diff(lparams[i].second->value, params[i].second->value) == 0.0);
  }

  Rng rng(40);
  const Tensor p_in = random_field(9, 16, 5, rng);
  const Tensor q_in = random_field(9, 16, 4, rng);
  auto [psi_a, delta_a] = model.predict(ad::constant(p_in), ad::constant(q_in), 0);
  auto [psi_b, delta_b] = loaded.predict(ad::constant(p_in), ad::constant(q_in), 0);
  CHECK(testing::max_abs_diff(psi_a->value, psi_b->value) == 0.0);
  CHECK(testing::max_abs_diff(delta_a->value, delta_b->value) == 0.0);
}

}  // TEST_SUITE
