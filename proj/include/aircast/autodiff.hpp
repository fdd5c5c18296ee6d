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
#include <memory>
#include <vector>

#include "aircast/tensor.hpp"

namespace aircast::ad {

// ---------------------------------------------------------------------------
// Reverse-mode autodiff on Tensor. Ops build a tape; backward() walks it in
// reverse topological order. Everything runs in float64 so analytic
// gradients can be validated against central finite differences.
//
// Spatial convention for rank-3 tensors: (rows=latitude, cols=longitude,
// channels). All spatial ops pad with periodic wrap in longitude and edge
// replication in latitude, which respects the spherical topology.
// ---------------------------------------------------------------------------

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buffer();  // zero-initialized, value-shaped
};

// Tape recording is disabled inside a NoGradGuard scope; ops then return
// plain constants and the graph is never retained.
bool grad_enabled();
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();

 private:
  bool prev_;
};

Var constant(Tensor v);
Var make_param(Tensor v);  // leaf with requires_grad = true

// Seeds d(root)/d(root) = 1 and accumulates gradients into every reachable
// node with requires_grad. Root must be a single-element tensor.
void backward(const Var& root);

// --- elementwise -----------------------------------------------------------
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var gelu(const Var& x);
Var exp_op(const Var& x);
Var abs_op(const Var& x);

// --- linear algebra ---------------------------------------------------------
// x[..., k] * w[k, n] -> [..., n]; leading dims are batch.
Var linear(const Var& x, const Var& w);
// b[n] (or [1, n]) broadcast-added over leading dims of x[..., n].
Var add_channel_bias(const Var& x, const Var& b);

// --- spatial ops on (h, w, c) ------------------------------------------------
// Patch extraction: out[i, j, (di*k+dj)*c + ch] = x[s*i+di-pad, s*j+dj-pad, ch]
// with pad = (k-1)/2; h and w must be divisible by the stride.
Var im2col(const Var& x, int kernel, int stride);
// Depthwise convolution, stride 1; kern is (k*k, c).
Var depthwise_conv(const Var& x, const Var& kern, int kernel);
// Nearest-neighbour 2x upsampling.
Var upsample2x(const Var& x);
// Per-cell layer normalization over the channel dimension.
Var layer_norm_channels(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-6);
Var concat_channels(const Var& a, const Var& b);
// Per-channel mux: out[..., c] = take_b[c] ? b[..., c] : a[..., c].
Var channel_select(const Var& a, const Var& b, std::vector<char> take_b);
// Grow to (new_h, new_w): longitude wraps, latitude replicates the last row.
Var pad_spatial(const Var& x, int new_h, int new_w);
Var crop_spatial(const Var& x, int h, int w);

// --- reductions --------------------------------------------------------------
// out[c] = sum_{i,j} x[i,j,c] * row_w[i].
Var weighted_colsum(const Var& x, const std::vector<double>& row_w);
// Elementwise division by a constant tensor of identical shape.
Var div_by(const Var& v, Tensor denom);
Var mean_all(const Var& x);

}  // namespace aircast::ad
