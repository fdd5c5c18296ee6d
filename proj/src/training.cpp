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

#include "aircast/training.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace aircast {

namespace {
constexpr double kBaseErrorFloor = 1e-8;
}

TrainStage train_stage_from_string(const std::string& s) {
  if (s == "pretrain") return TrainStage::kPretrain;
  if (s == "finetune") return TrainStage::kFinetune;
  if (s == "multistep") return TrainStage::kMultistep;
  throw ConfigError("unknown training stage: " + s);
}

std::string to_string(TrainStage s) {
  switch (s) {
    case TrainStage::kPretrain: return "pretrain";
    case TrainStage::kFinetune: return "finetune";
    case TrainStage::kMultistep: return "multistep";
  }
  return "?";
}

void TrainConfig::validate() const {
  AIRCAST_CHECK(lr_start < max_lr, ConfigError, "lr_start must be below max_lr");
  AIRCAST_CHECK(lr_floor < lr_start, ConfigError, "lr_floor must be below lr_start");
  AIRCAST_CHECK(epochs >= 1 && batch_size >= 1, ConfigError, "bad epoch/batch settings");
  AIRCAST_CHECK(rollout_steps >= 1, ConfigError, "rollout_steps must be >= 1");
}

TrainConfig TrainConfig::pretrain_default() {
  TrainConfig cfg;
  cfg.stage = TrainStage::kPretrain;
  cfg.max_lr = 2.5e-4;
  cfg.epochs = 40;
  return cfg;
}

TrainConfig TrainConfig::finetune_default() {
  TrainConfig cfg;
  cfg.stage = TrainStage::kFinetune;
  cfg.max_lr = 1e-5;
  cfg.epochs = 100;
  return cfg;
}

TrainConfig TrainConfig::multistep_default() {
  TrainConfig cfg;
  cfg.stage = TrainStage::kMultistep;
  cfg.max_lr = 1e-5;
  cfg.epochs = 20;
  cfg.rollout_steps = 4;
  return cfg;
}

std::vector<double> per_variable_base_error(const Tensor& base, const Tensor& target,
                                            const std::vector<double>& w) {
  check_same_shape(base, target, "per_variable_base_error");
  const int h = base.dim(0), wd = base.dim(1), c = base.dim(2);
  AIRCAST_CHECK(static_cast<int>(w.size()) == h, ShapeError,
                "latitude weight length must match rows");
  std::vector<double> e(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < h; ++i) {
    const double wi = w[static_cast<std::size_t>(i)];
    for (int j = 0; j < wd; ++j) {
      const double* b = base.data() + (static_cast<std::int64_t>(i) * wd + j) * c;
      const double* p = target.data() + (static_cast<std::int64_t>(i) * wd + j) * c;
      for (int ch = 0; ch < c; ++ch) e[static_cast<std::size_t>(ch)] += std::abs(b[ch] - p[ch]) * wi;
    }
  }
  for (double& v : e) v = std::max(v, kBaseErrorFloor);
  return e;
}

LossBreakdown loss(const Tensor& pred, const Tensor& target, const Tensor& base,
                   const std::vector<double>& w) {
  check_same_shape(pred, target, "loss");
  const std::vector<double> e = per_variable_base_error(base, target, w);
  const int h = pred.dim(0), wd = pred.dim(1), c = pred.dim(2);
  std::vector<double> ehat(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < h; ++i) {
    const double wi = w[static_cast<std::size_t>(i)];
    for (int j = 0; j < wd; ++j) {
      const double* a = pred.data() + (static_cast<std::int64_t>(i) * wd + j) * c;
      const double* p = target.data() + (static_cast<std::int64_t>(i) * wd + j) * c;
      for (int ch = 0; ch < c; ++ch) ehat[static_cast<std::size_t>(ch)] += std::abs(a[ch] - p[ch]) * wi;
    }
  }
  LossBreakdown out;
  out.base_error = e;
  out.per_var_ratio.resize(static_cast<std::size_t>(c));
  for (int ch = 0; ch < c; ++ch) {
    out.per_var_ratio[static_cast<std::size_t>(ch)] =
        ehat[static_cast<std::size_t>(ch)] / e[static_cast<std::size_t>(ch)];
    out.loss += out.per_var_ratio[static_cast<std::size_t>(ch)];
  }
  out.loss /= c;
  return out;
}

ad::Var loss_graph(const ad::Var& pred, const Tensor& target, const std::vector<double>& e,
                   const std::vector<double>& w) {
  const int c = pred->value.dim(2);
  AIRCAST_CHECK(static_cast<int>(e.size()) == c, ShapeError, "denominator count mismatch");
  Tensor denom({c});
  for (int ch = 0; ch < c; ++ch) denom[ch] = e[static_cast<std::size_t>(ch)];
  const ad::Var diff = ad::sub(pred, ad::constant(target));
  const ad::Var weighted = ad::weighted_colsum(ad::abs_op(diff), w);
  return ad::mean_all(ad::div_by(weighted, std::move(denom)));
}

double lr_at(std::int64_t iteration, std::int64_t total_iterations, const TrainConfig& cfg) {
  AIRCAST_CHECK(iteration >= 0 && iteration < total_iterations, RangeError,
                "iteration outside the schedule");
  const std::int64_t iters_per_epoch = std::max<std::int64_t>(1, total_iterations / cfg.epochs);
  const std::int64_t warmup = std::max<std::int64_t>(1, iters_per_epoch / 3);
  if (iteration < warmup) {
    return cfg.lr_start +
           (cfg.max_lr - cfg.lr_start) * static_cast<double>(iteration) / static_cast<double>(warmup);
  }
  const std::int64_t span = total_iterations - 1 - warmup;
  const double progress =
      span <= 0 ? 1.0 : static_cast<double>(iteration - warmup) / static_cast<double>(span);
  return cfg.lr_floor + (cfg.max_lr - cfg.lr_floor) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

AdamW::AdamW(std::vector<std::pair<std::string, ad::Var>> params, const TrainConfig& cfg)
    : params_(std::move(params)),
      beta1_(cfg.adam_beta1),
      beta2_(cfg.adam_beta2),
      eps_(cfg.adam_eps),
      weight_decay_(cfg.weight_decay) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& [name, p] : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void AdamW::zero_grad() {
  for (auto& [name, p] : params_)
    if (!p->grad.empty())
      for (std::int64_t i = 0; i < p->grad.size(); ++i) p->grad[i] = 0.0;
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    ad::Var& p = params_[k].second;
    if (p->grad.empty()) continue;  // parameter unused by this graph
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::int64_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p->value[i] -= lr * (mhat / (std::sqrt(vhat) + eps_) + weight_decay_ * p->value[i]);
    }
  }
}

namespace {

struct Sample {
  Tensor p_in;       // (M, N, 2C+S) model space
  Tensor q_in;       // (M, N, 2D) model space
  Tensor p_prev_ms;  // components kept for multistep unrolls
  Tensor p_init_ms;
  std::vector<Tensor> met_ms;  // Q at steps 0..rollout_steps (model space)
  std::vector<Tensor> targets_ms;
  UtcTime initial_time = 0;
};

Sample load_sample(const GridPack& pack, const NormStats& stats, int t, int horizon) {
  Sample s;
  const FieldTensor p_prev = pack.pollutants_at(t - 1);
  const FieldTensor p_init = pack.pollutants_at(t);
  s.p_prev_ms = pollutants_to_model_space(p_prev.values, stats);
  s.p_init_ms = pollutants_to_model_space(p_init.values, stats);
  s.initial_time = p_init.valid_time;

  for (int i = 0; i <= horizon; ++i)
    s.met_ms.push_back(met_to_model_space(pack.meteorology_at(t + i).values, stats));
  for (int k = 1; k <= horizon; ++k)
    s.targets_ms.push_back(pollutants_to_model_space(pack.pollutants_at(t + k).values, stats));
  return s;
}

std::string dump_ratios(const std::vector<double>& ratios) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (i) os << ",";
    os << ratios[i];
  }
  os << "]";
  return os.str();
}

}  // namespace

TrainResult train_stage(const GridPack& pack, const TrainConfig& cfg, CoupledModel& model,
                        const std::string& checkpoint_path, const std::string& metrics_path) {
  cfg.validate();
  const auto& manifest = pack.manifest();
  const auto& catalog = manifest.catalog;
  const int horizon = cfg.stage == TrainStage::kMultistep ? cfg.rollout_steps : 1;

  // Valid initial times: one step of history behind, `horizon` targets ahead.
  const int lo = std::max(1, cfg.t_begin < 0 ? 1 : cfg.t_begin);
  const int hi = std::min(pack.n_times() - horizon, cfg.t_end < 0 ? pack.n_times() - horizon : cfg.t_end);
  std::vector<int> windows;
  for (int t = lo; t < hi; ++t) windows.push_back(t);
  AIRCAST_CHECK(!windows.empty(), ArgumentError, "pack too small for one training window");

  const std::vector<double> lat_w = latitude_weights(manifest.grid).w;
  const std::vector<char> grey = greyline_mask(catalog);
  const Tensor statics = pack.statics().values;

  AdamW opt(model.named_params(), cfg);
  Rng rng(cfg.seed);

  std::ofstream metrics;
  if (!metrics_path.empty()) {
    metrics.open(metrics_path, std::ios::app);
    AIRCAST_CHECK(metrics.good(), IntegrityError, "cannot open metrics log: " + metrics_path);
  }

  const std::int64_t total_iters =
      static_cast<std::int64_t>(cfg.epochs) * static_cast<std::int64_t>(windows.size());
  TrainResult result;
  std::int64_t it = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = windows;
    Rng erng = rng.fork(static_cast<std::uint64_t>(epoch));
    shuffle(order, erng);

    double epoch_loss = 0.0;
    for (int t : order) {
      const Sample s = load_sample(pack, model.norm_stats(), t, horizon);
      opt.zero_grad();

      // Single-step stages are a 1-step unroll of the same graph.
      RolloutOptions options;
      options.physical_roundtrip = false;
      const auto steps =
          rollout_graph(model, statics, ad::constant(s.p_prev_ms), ad::constant(s.p_init_ms),
                        s.met_ms, s.initial_time, horizon, grey, options);
      ad::Var total;
      LossBreakdown step1;
      for (int k = 0; k < horizon; ++k) {
        const auto& step = steps[static_cast<std::size_t>(k)];
        const Tensor& target = s.targets_ms[static_cast<std::size_t>(k)];
        const std::vector<double> e =
            per_variable_base_error(step.base.values->value, target, lat_w);
        const ad::Var lk = loss_graph(step.prediction, target, e, lat_w);
        if (k == 0) step1 = loss(step.prediction->value, target, step.base.values->value, lat_w);
        total = total ? ad::add(total, lk) : lk;
      }
      if (horizon > 1) total = ad::scale(total, 1.0 / horizon);

      const double loss_value = total->value[0];
      if (!std::isfinite(loss_value)) {
        throw Error("non-finite loss at iteration " + std::to_string(it) + ", window t=" +
                    std::to_string(t) + " (" + utc_to_iso(s.initial_time) +
                    "), step-1 ratios " + dump_ratios(step1.per_var_ratio));
      }
      ad::backward(total);
      opt.step(lr_at(it, total_iters, cfg));

      epoch_loss += loss_value;
      if (metrics.is_open()) {
        metrics << "{\"iter\":" << it << ",\"epoch\":" << epoch << ",\"window\":" << t
                << ",\"lr\":" << lr_at(it, total_iters, cfg) << ",\"loss\":" << loss_value
                << ",\"ratios\":" << dump_ratios(step1.per_var_ratio) << "}\n";
      }
      ++it;
    }
    epoch_loss /= static_cast<double>(order.size());
    result.epoch_loss.push_back(epoch_loss);
    if (!checkpoint_path.empty()) model.save_checkpoint(checkpoint_path);
  }
  result.iterations = it;
  if (metrics.is_open()) metrics.flush();
  return result;
}

}  // namespace aircast
