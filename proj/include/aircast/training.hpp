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

#include "aircast/forecast.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// Training: base-relative latitude-weighted L1 loss, warmup + cosine
// learning-rate schedule, decoupled-weight-decay Adam, and the stage driver
// (single-step pretrain/finetune and multi-step unrolling).
// ---------------------------------------------------------------------------

enum class TrainStage { kPretrain, kFinetune, kMultistep };
TrainStage train_stage_from_string(const std::string& s);
std::string to_string(TrainStage s);

struct TrainConfig {
  TrainStage stage = TrainStage::kPretrain;
  double max_lr = 2.5e-4;  // 1e-5 for fine-tuning
  double lr_start = 1e-8;
  double lr_floor = 1e-9;
  int epochs = 40;
  int rollout_steps = 4;  // multistep stage only
  int batch_size = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.95;
  double adam_eps = 1e-8;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
  // Initial-time range [t_begin, t_end) used for sampling; -1 means the full
  // valid range. Lets statistics and training share a train split.
  int t_begin = -1;
  int t_end = -1;

  void validate() const;
  static TrainConfig pretrain_default();
  static TrainConfig finetune_default();
  static TrainConfig multistep_default();
};

struct LossBreakdown {
  double loss = 0.0;
  std::vector<double> per_var_ratio;  // prediction error over base error, per variable
  std::vector<double> base_error;     // denominators, floored
};

// e_k = sum_{i,j} |b - p| * w_i per variable, floored at 1e-8 so the loss
// ratio stays finite when the base already matches the target.
std::vector<double> per_variable_base_error(const Tensor& base, const Tensor& target,
                                            const std::vector<double>& w);

// loss = mean_k [ sum |p_hat - p| w ] / e_k. Plain evaluation.
LossBreakdown loss(const Tensor& pred, const Tensor& target, const Tensor& base,
                   const std::vector<double>& w);

// Differentiable loss with precomputed denominators.
ad::Var loss_graph(const ad::Var& pred, const Tensor& target, const std::vector<double>& e,
                   const std::vector<double>& w);

// Warmup rises linearly from lr_start over the first third of an epoch, then
// cosine annealing decays to lr_floor by the final iteration.
double lr_at(std::int64_t iteration, std::int64_t total_iterations, const TrainConfig& cfg);

class AdamW {
 public:
  AdamW(std::vector<std::pair<std::string, ad::Var>> params, const TrainConfig& cfg);
  void step(double lr);
  void zero_grad();

 private:
  std::vector<std::pair<std::string, ad::Var>> params_;
  std::vector<Tensor> m_, v_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::int64_t t_ = 0;
};

struct TrainResult {
  std::vector<double> epoch_loss;   // mean loss per epoch
  std::int64_t iterations = 0;
};

// Runs one training stage over slice_window samples. Writes a checkpoint
// after every epoch (atomic overwrite) and appends line-delimited JSON
// metrics per iteration. Deterministic given config.seed. A non-finite loss
// aborts with a diagnostic describing the offending sample.
TrainResult train_stage(const GridPack& pack, const TrainConfig& cfg, CoupledModel& model,
                        const std::string& checkpoint_path, const std::string& metrics_path);

}  // namespace aircast
