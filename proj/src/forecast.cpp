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

#include "aircast/forecast.hpp"

#include <algorithm>

namespace aircast {

StateHistory::StateHistory(int idx_a, ad::Var state_a, int idx_b, ad::Var state_b) {
  AIRCAST_CHECK(idx_b == idx_a + 1, HistoryError, "history states must be consecutive");
  buffer_.emplace_back(idx_a, std::move(state_a));
  buffer_.emplace_back(idx_b, std::move(state_b));
}

void StateHistory::push(int time_idx, ad::Var state) {
  AIRCAST_CHECK(time_idx == buffer_.back().first + 1, HistoryError,
                "states must be pushed in consecutive time order");
  buffer_.emplace_back(time_idx, std::move(state));
  // Only the two most recent states are ever needed: the step inputs and the
  // 24-hour-lag base both live within two steps of the forecast time.
  while (buffer_.size() > 2) buffer_.erase(buffer_.begin());
}

const ad::Var& StateHistory::at(int time_idx, int initial_idx) const {
  AIRCAST_CHECK(time_idx <= initial_idx, HistoryError,
                "causality violation: requested state at step " + std::to_string(time_idx) +
                    " after initial time " + std::to_string(initial_idx));
  if (observer_) observer_(time_idx, initial_idx);
  for (const auto& [idx, state] : buffer_)
    if (idx == time_idx) return state;
  throw HistoryError("state at step " + std::to_string(time_idx) + " is no longer buffered");
}

PollutantBase build_base(const StateHistory& history, int forecast_idx,
                         const std::vector<char>& greyline_mask) {
  const int initial_idx = forecast_idx - 1;
  const ad::Var& recent = history.at(initial_idx, initial_idx);
  const int n_vars = static_cast<int>(greyline_mask.size());
  AIRCAST_CHECK(recent->value.dim(2) == n_vars, ShapeError,
                "greyline mask length must match pollutant channels");

  PollutantBase base;
  const bool any_grey = std::any_of(greyline_mask.begin(), greyline_mask.end(),
                                    [](char m) { return m != 0; });
  if (any_grey) {
    const ad::Var& lagged = history.at(forecast_idx - 2, initial_idx);
    base.values = ad::channel_select(recent, lagged, greyline_mask);
  } else {
    base.values = recent;
  }
  base.source_time_idx.resize(static_cast<std::size_t>(n_vars));
  for (int c = 0; c < n_vars; ++c)
    base.source_time_idx[static_cast<std::size_t>(c)] =
        greyline_mask[static_cast<std::size_t>(c)] ? forecast_idx - 2 : initial_idx;
  return base;
}

Tensor apply_changes(const Tensor& psi, const Tensor& delta, const Tensor& base) {
  check_same_shape(psi, delta, "apply_changes");
  check_same_shape(psi, base, "apply_changes");
  Tensor out = base;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = psi[i] * out[i] + delta[i];
  return out;
}

ad::Var apply_changes_graph(const ad::Var& psi, const ad::Var& delta, const ad::Var& base) {
  return ad::add(ad::mul(psi, base), delta);
}

std::vector<char> greyline_mask(const VariableCatalog& catalog) {
  std::vector<char> mask(static_cast<std::size_t>(catalog.n_pollutants()), 0);
  for (int c = 0; c < catalog.n_pollutants(); ++c)
    mask[static_cast<std::size_t>(c)] =
        catalog.is_greyline(catalog.pollutant_vars[static_cast<std::size_t>(c)]) ? 1 : 0;
  return mask;
}

std::vector<RolloutStep> rollout_graph(const CoupledModel& model, const Tensor& statics,
                                       const ad::Var& p_prev_ms, const ad::Var& p_init_ms,
                                       const std::vector<Tensor>& met_ms, UtcTime initial_time,
                                       int n_steps, const std::vector<char>& greyline_mask,
                                       const RolloutOptions& options) {
  AIRCAST_CHECK(n_steps >= 1, ArgumentError, "rollout needs at least one step");
  AIRCAST_CHECK(static_cast<int>(met_ms.size()) >= n_steps + 1, ArgumentError,
                "meteorology sequence too short: need " + std::to_string(n_steps + 1) +
                    " records, got " + std::to_string(met_ms.size()));

  StateHistory history(-1, p_prev_ms, 0, p_init_ms);
  if (options.observer) history.set_observer(options.observer);
  const ad::Var statics_var = ad::constant(statics);

  std::vector<RolloutStep> steps;
  steps.reserve(static_cast<std::size_t>(n_steps));
  for (int k = 1; k <= n_steps; ++k) {
    const int initial_idx = k - 1;
    RolloutStep step;
    step.valid_time = initial_time + static_cast<UtcTime>(k) * kStepSeconds;
    step.base = build_base(history, k, greyline_mask);

    const ad::Var p_in = ad::concat_channels(
        ad::concat_channels(history.at(k - 2, initial_idx), history.at(k - 1, initial_idx)),
        statics_var);
    const ad::Var q_in = ad::concat_channels(
        ad::constant(met_ms[static_cast<std::size_t>(k - 1)]),
        ad::constant(met_ms[static_cast<std::size_t>(k)]));

    const UtcTime step_initial_time =
        initial_time + static_cast<UtcTime>(initial_idx) * kStepSeconds;
    auto [psi, delta] = model.predict(p_in, q_in, step_initial_time);
    step.prediction = apply_changes_graph(psi, delta, step.base.values);

    if (options.physical_roundtrip) {
      step.physical = pollutants_to_physical(step.prediction->value, model.norm_stats());
      // Feeding the re-normalized emitted field forward keeps continued
      // rollouts bit-identical to longer ones.
      history.push(k, ad::constant(pollutants_to_model_space(step.physical, model.norm_stats())));
    } else {
      history.push(k, step.prediction);
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

ForecastResult rollout(const CoupledModel& model, const VariableCatalog& catalog,
                       const FieldTensor& p_prev, const FieldTensor& p_init,
                       const FieldTensor& q_init, const std::vector<FieldTensor>& met_seq,
                       const Tensor& statics, int n_steps) {
  AIRCAST_CHECK(n_steps >= 1, ArgumentError, "rollout needs n_steps >= 1");
  AIRCAST_CHECK(static_cast<int>(met_seq.size()) >= n_steps, ArgumentError,
                "met_seq must cover every requested lead step");
  AIRCAST_CHECK(p_init.valid_time - p_prev.valid_time == kStepSeconds, ArgumentError,
                "initial states must be 12 hours apart");

  ad::NoGradGuard ng;
  const NormStats& stats = model.norm_stats();
  const ad::Var p_prev_ms = ad::constant(pollutants_to_model_space(p_prev.values, stats));
  const ad::Var p_init_ms = ad::constant(pollutants_to_model_space(p_init.values, stats));
  std::vector<Tensor> met_ms;
  met_ms.reserve(met_seq.size() + 1);
  met_ms.push_back(met_to_model_space(q_init.values, stats));
  for (const auto& q : met_seq) met_ms.push_back(met_to_model_space(q.values, stats));

  RolloutOptions options;
  options.physical_roundtrip = true;
  const auto steps = rollout_graph(model, statics, p_prev_ms, p_init_ms, met_ms,
                                   p_init.valid_time, n_steps, greyline_mask(catalog), options);

  ForecastResult result;
  for (const auto& step : steps) {
    FieldTensor f;
    f.values = step.physical;
    f.var_names = catalog.pollutant_vars;
    f.valid_time = step.valid_time;
    result.fields.push_back(std::move(f));
    result.base_source_idx.push_back(step.base.source_time_idx);
  }
  return result;
}

PackData forecast_to_pack(const ForecastResult& result, const VariableCatalog& catalog,
                          const GridSpec& grid, const FieldTensor& q_init,
                          const std::vector<FieldTensor>& met_seq, const Tensor& statics) {
  AIRCAST_CHECK(!result.fields.empty(), ArgumentError, "empty forecast");
  AIRCAST_CHECK(met_seq.size() >= result.fields.size(), ArgumentError,
                "met_seq shorter than forecast");
  (void)q_init;
  PackData pack;
  pack.grid = grid;
  pack.catalog = catalog;
  pack.statics = statics;
  for (std::size_t k = 0; k < result.fields.size(); ++k) {
    pack.times.push_back(result.fields[k].valid_time);
    pack.pollutants.push_back(result.fields[k].values);
    pack.meteorology.push_back(met_seq[k].values);
  }
  return pack;
}

}  // namespace aircast
