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

#include "aircast/autodiff.hpp"

#include <cmath>
#include <functional>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace aircast;
namespace adx = aircast::ad;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

// Max relative error between analytic and central-difference gradients over
// every coordinate of every input.
double fd_max_rel(const std::function<adx::Var(const std::vector<adx::Var>&)>& build,
                  const std::vector<Tensor>& inputs) {
  std::vector<adx::Var> params;
  for (const auto& t : inputs) params.push_back(adx::make_param(t));
  adx::Var root = build(params);
  adx::backward(root);

  auto eval = [&](const std::vector<Tensor>& vals) {
    adx::NoGradGuard ng;
    std::vector<adx::Var> consts;
    for (const auto& t : vals) consts.push_back(adx::constant(t));
    return build(consts)->value[0];
  };

  double worst = 0.0;
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    for (std::int64_t i = 0; i < inputs[p].size(); ++i) {
      std::vector<Tensor> plus = inputs, minus = inputs;
      const double h = 1e-6 * std::max(1.0, std::abs(inputs[p][i]));
      plus[p][i] += h;
      minus[p][i] -= h;
      const double fd = (eval(plus) - eval(minus)) / (2.0 * h);
      const double an = params[p]->grad.empty() ? 0.0 : params[p]->grad[i];
      worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}));
    }
  }
  return worst;
}

// Random fixed projection to a scalar so every output entry matters.
adx::Var project(const adx::Var& out, const Tensor& probe) {
  return adx::mean_all(adx::mul(out, adx::constant(probe)));
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("elementwise op gradients match finite differences") {
  Rng rng(100);
  const Tensor a = random_tensor({3, 4, 2}, rng);
  const Tensor b = random_tensor({3, 4, 2}, rng);
  const Tensor probe = random_tensor({3, 4, 2}, rng);

  auto mk = [&](auto op) {
    return [op, &probe](const std::vector<adx::Var>& v) { return project(op(v), probe); };
  };
  CHECK(fd_max_rel(mk([](const std::vector<adx::Var>& v) { return adx::add(v[0], v[1]); }),
                   {a, b}) < 1e-6);
  CHECK(fd_max_rel(mk([](const std::vector<adx::Var>& v) { return adx::sub(v[0], v[1]); }),
                   {a, b}) < 1e-6);
  CHECK(fd_max_rel(mk([](const std::vector<adx::Var>& v) { return adx::mul(v[0], v[1]); }),
                   {a, b}) < 1e-6);
  CHECK(fd_max_rel(mk([](const std::vector<adx::Var>& v) { return adx::scale(v[0], -2.5); }),
                   {a}) < 1e-6);
  CHECK(fd_max_rel(mk([](const std::vector<adx::Var>& v) { return adx::gelu(v[0]); }), {a}) <
        1e-6);
  CHECK(fd_max_rel(mk([](const std::vector<adx::Var>& v) { return adx::exp_op(v[0]); }), {a}) <
        1e-6);
}

TEST_CASE("abs gradient away from the kink") {
  Rng rng(101);
  Tensor a = random_tensor({4, 4, 2}, rng);
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i]) < 0.05) a[i] = 0.1;  // keep clear of zero
  const Tensor probe = random_tensor({4, 4, 2}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) { return project(adx::abs_op(v[0]), probe); },
            {a}) < 1e-6);
}

TEST_CASE("linear and bias gradients") {
  Rng rng(102);
  const Tensor x = random_tensor({3, 4, 5}, rng);
  const Tensor w = random_tensor({5, 3}, rng);
  const Tensor bias = random_tensor({3}, rng);
  const Tensor probe = random_tensor({3, 4, 3}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::add_channel_bias(adx::linear(v[0], v[1]), v[2]), probe);
            },
            {x, w, bias}) < 1e-6);
}

TEST_CASE("im2col gradients, stride 1 and 2") {
  Rng rng(103);
  const Tensor x = random_tensor({4, 6, 3}, rng);
  const Tensor probe1 = random_tensor({4, 6, 27}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::im2col(v[0], 3, 1), probe1);
            },
            {x}) < 1e-6);
  const Tensor probe2 = random_tensor({2, 3, 27}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::im2col(v[0], 3, 2), probe2);
            },
            {x}) < 1e-6);
}

TEST_CASE("depthwise conv gradients, kernel larger than the grid") {
  Rng rng(104);
  const Tensor x = random_tensor({3, 4, 2}, rng);
  const Tensor k = random_tensor({25, 2}, rng, 0.3);  // 5x5 on a 3x4 grid
  const Tensor probe = random_tensor({3, 4, 2}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::depthwise_conv(v[0], v[1], 5), probe);
            },
            {x, k}) < 1e-6);
}

TEST_CASE("upsample, concat, select, pad, crop gradients") {
  Rng rng(105);
  const Tensor x = random_tensor({2, 3, 2}, rng);
  const Tensor y = random_tensor({2, 3, 3}, rng);
  const Tensor probe_up = random_tensor({4, 6, 2}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::upsample2x(v[0]), probe_up);
            },
            {x}) < 1e-6);

  const Tensor probe_cat = random_tensor({2, 3, 5}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::concat_channels(v[0], v[1]), probe_cat);
            },
            {x, y}) < 1e-6);

  const Tensor y2 = random_tensor({2, 3, 2}, rng);
  const Tensor probe_sel = random_tensor({2, 3, 2}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::channel_select(v[0], v[1], {1, 0}), probe_sel);
            },
            {x, y2}) < 1e-6);

  const Tensor probe_pad = random_tensor({4, 8, 2}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::pad_spatial(v[0], 4, 8), probe_pad);
            },
            {x}) < 1e-6);

  const Tensor probe_crop = random_tensor({2, 2, 2}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::crop_spatial(v[0], 2, 2), probe_crop);
            },
            {x}) < 1e-6);
}

TEST_CASE("layer norm gradients") {
  Rng rng(106);
  const Tensor x = random_tensor({3, 4, 6}, rng);
  const Tensor g = random_tensor({6}, rng, 0.5);
  const Tensor b = random_tensor({6}, rng, 0.5);
  const Tensor probe = random_tensor({3, 4, 6}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::layer_norm_channels(v[0], v[1], v[2]), probe);
            },
            {x, g, b}) < 1e-5);
}

TEST_CASE("reduction gradients") {
  Rng rng(107);
  const Tensor x = random_tensor({4, 5, 3}, rng);
  const std::vector<double> w = {0.0, 0.5, 1.0, 0.25};
  Tensor denom({3});
  denom[0] = 0.5;
  denom[1] = 2.0;
  denom[2] = 1.5;
  const Tensor probe = random_tensor({3}, rng);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) {
              return project(adx::div_by(adx::weighted_colsum(v[0], w), denom), probe);
            },
            {x}) < 1e-6);
  CHECK(fd_max_rel(
            [&](const std::vector<adx::Var>& v) { return adx::mean_all(v[0]); }, {x}) < 1e-6);
}

TEST_CASE("gradients accumulate through shared nodes") {
  Rng rng(108);
  const Tensor x = random_tensor({2, 2, 2}, rng);
  // z = mean(x*x + x): dz/dx = (2x + 1)/n
  auto build = [](const std::vector<adx::Var>& v) {
    return adx::mean_all(adx::add(adx::mul(v[0], v[0]), v[0]));
  };
  CHECK(fd_max_rel(build, {x}) < 1e-6);
  const adx::Var p = adx::make_param(x);
  adx::Var root = build({p});
  adx::backward(root);
  for (std::int64_t i = 0; i < x.size(); ++i)
    CHECK(p->grad[i] == doctest::Approx((2.0 * x[i] + 1.0) / x.size()).epsilon(1e-12));
}

TEST_CASE("no-grad mode records nothing") {
  const adx::Var p = adx::make_param(Tensor::full({2, 2, 2}, 1.0));
  adx::NoGradGuard ng;
  const adx::Var y = adx::scale(p, 2.0);
  CHECK_FALSE(y->requires_grad);
  CHECK(y->parents.empty());
}

TEST_CASE("backward demands a scalar root") {
  const adx::Var p = adx::make_param(Tensor::full({2, 2}, 1.0));
  const adx::Var y = adx::scale(p, 2.0);
  CHECK_THROWS_AS(adx::backward(y), ArgumentError);
}

TEST_CASE("padding semantics: wrap in longitude, replicate in latitude") {
  Tensor x({2, 3, 1});
  // rows: [1 2 3; 4 5 6]
  x.at(0, 0, 0) = 1;
  x.at(0, 1, 0) = 2;
  x.at(0, 2, 0) = 3;
  x.at(1, 0, 0) = 4;
  x.at(1, 1, 0) = 5;
  x.at(1, 2, 0) = 6;
  adx::NoGradGuard ng;
  const Tensor padded = adx::pad_spatial(adx::constant(x), 4, 6)->value;
  CHECK(padded.at(0, 3, 0) == 1);  // wrapped column
  CHECK(padded.at(0, 5, 0) == 3);
  CHECK(padded.at(2, 0, 0) == 4);  // replicated last row
  CHECK(padded.at(3, 4, 0) == 5);
  const Tensor back = adx::crop_spatial(adx::constant(padded), 2, 3)->value;
  CHECK(testing::max_abs_diff(back, x) == 0.0);
}

}  // TEST_SUITE
