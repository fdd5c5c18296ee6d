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

#include <functional>
#include <optional>

#include "aircast/dataio.hpp"
#include "aircast/model.hpp"

namespace aircast {

// ---------------------------------------------------------------------------
// Forecast assembly: pollutant base construction with the grey-line rule,
// change application, and cyclic multi-step rollout.
//
// Time bookkeeping uses step indices relative to the rollout start: index 0
// is the initial state, -1 the history state, k >= 1 the k-th forecast. One
// step is 12 hours, so "24 hours before the forecast time" is index k - 2.
// ---------------------------------------------------------------------------

// Rolling buffer of the two most recent model-space pollutant states. Every
// access is causality-checked against the step's initial time; tests can
// observe accesses.
class StateHistory {
 public:
  using Observer = std::function<void(int accessed_idx, int initial_idx)>;

  StateHistory(int idx_a, ad::Var state_a, int idx_b, ad::Var state_b);

  void push(int time_idx, ad::Var state);  // drops states older than two steps
  const ad::Var& at(int time_idx, int initial_idx) const;
  void set_observer(Observer obs) { observer_ = std::move(obs); }

 private:
  std::vector<std::pair<int, ad::Var>> buffer_;
  Observer observer_;
};

// The reference field that predicted changes modify, with per-variable
// source times for auditing.
struct PollutantBase {
  ad::Var values;                    // (M, N, C) model space
  std::vector<int> source_time_idx;  // per variable, relative step index
};

// Grey-line variables copy the state 24 h before the forecast time
// (index forecast_idx - 2); all others take the most recent state
// (forecast_idx - 1, the step's initial time).
PollutantBase build_base(const StateHistory& history, int forecast_idx,
                         const std::vector<char>& greyline_mask);

// P_hat = psi o base + delta, elementwise.
Tensor apply_changes(const Tensor& psi, const Tensor& delta, const Tensor& base);
ad::Var apply_changes_graph(const ad::Var& psi, const ad::Var& delta, const ad::Var& base);

// One rollout step's artifacts.
struct RolloutStep {
  ad::Var prediction;       // model space, differentiable when grads are on
  Tensor physical;          // filled when physical_roundtrip is set
  PollutantBase base;
  UtcTime valid_time = 0;
};

struct RolloutOptions {
  // Emit physical fields (inverse transforms + nonnegativity clamp) and feed
  // the re-normalized result back as the next state, so continuing from the
  // emitted outputs reproduces the internal trajectory exactly. Training
  // unrolls keep the graph differentiable instead.
  bool physical_roundtrip = true;
  StateHistory::Observer observer;
};

// Shared graph builder for inference rollouts and multi-step training
// unrolls. met_ms[i] is the model-space meteorology at step index i,
// i = 0..n_steps; statics are appended to every pollutant input pair.
std::vector<RolloutStep> rollout_graph(const CoupledModel& model, const Tensor& statics,
                                       const ad::Var& p_prev_ms, const ad::Var& p_init_ms,
                                       const std::vector<Tensor>& met_ms, UtcTime initial_time,
                                       int n_steps, const std::vector<char>& greyline_mask,
                                       const RolloutOptions& options);

struct ForecastResult {
  std::vector<FieldTensor> fields;                // physical units, one per lead step
  std::vector<std::vector<int>> base_source_idx;  // per step, per variable
};

// Physical-space rollout. q_init is the meteorology at the initial time;
// met_seq holds the forecast meteorology for lead steps 1..K.
ForecastResult rollout(const CoupledModel& model, const VariableCatalog& catalog,
                       const FieldTensor& p_prev, const FieldTensor& p_init,
                       const FieldTensor& q_init, const std::vector<FieldTensor>& met_seq,
                       const Tensor& statics, int n_steps);

// Forecast output as a pack (lead-time-indexed records); met channels carry
// the forcing that was used.
PackData forecast_to_pack(const ForecastResult& result, const VariableCatalog& catalog,
                          const GridSpec& grid, const FieldTensor& q_init,
                          const std::vector<FieldTensor>& met_seq, const Tensor& statics);

std::vector<char> greyline_mask(const VariableCatalog& catalog);

}  // namespace aircast
