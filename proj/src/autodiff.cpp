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

#include <Eigen/Dense>
#include <cmath>
#include <unordered_set>

namespace aircast::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

thread_local bool g_grad_enabled = true;

bool any_requires_grad(const std::vector<Var>& parents) {
  for (const auto& p : parents)
    if (p->requires_grad) return true;
  return false;
}

Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_grad_enabled && any_requires_grad(parents)) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward_fn = std::move(fn);
  }
  return n;
}

// Replicated latitude rows, periodic longitude columns.
inline int pad_row(int r, int h) { return r < 0 ? 0 : (r >= h ? h - 1 : r); }
inline int pad_col(int c, int w) {
  c %= w;
  return c < 0 ? c + w : c;
}

void check3d(const Var& x, const char* what) {
  AIRCAST_CHECK(x->value.ndim() == 3, ShapeError, std::string(what) + " expects a rank-3 tensor");
}

}  // namespace

Tensor& Node::grad_buffer() {
  if (grad.empty() && value.size() > 0) grad = Tensor(value.shape());
  return grad;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Var constant(Tensor v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  return n;
}

Var make_param(Tensor v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->requires_grad = true;
  return n;
}

void backward(const Var& root) {
  AIRCAST_CHECK(root->value.size() == 1, ArgumentError, "backward needs a scalar root");
  if (!root->requires_grad) return;

  // Reverse post-order DFS = topological order with consumers first.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* n;
    std::size_t next;
  };
  std::vector<Frame> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      Node* p = f.n->parents[f.next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  root->grad_buffer()[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

// --- elementwise -------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  check_same_shape(a->value, b->value, "add");
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
  return make_op(std::move(out), {a, b}, [](Node& n) {
    for (int k = 0; k < 2; ++k) {
      Node& p = *n.parents[static_cast<std::size_t>(k)];
      if (!p.requires_grad) continue;
      Tensor& g = p.grad_buffer();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a->value, b->value, "sub");
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
  return make_op(std::move(out), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a->value, b->value, "mul");
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
  return make_op(std::move(out), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) {
      Tensor& g = pa.grad_buffer();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa.value[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] *= s;
  return make_op(std::move(out), {a}, [s](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
  });
}

Var gelu(const Var& x) {
  Tensor out = x->value;
  for (std::int64_t i = 0; i < out.size(); ++i) {
    const double v = out[i];
    out[i] = 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2));
  }
  return make_op(std::move(out), {x}, [](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    constexpr double kInvSqrt2Pi = 0.3989422804014327;
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const double v = p.value[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      g[i] += n.grad[i] * (cdf + v * pdf);
    }
  });
}

Var exp_op(const Var& x) {
  Tensor out = x->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  return make_op(std::move(out), {x}, [](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * n.value[i];
  });
}

Var abs_op(const Var& x) {
  Tensor out = x->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] = std::abs(out[i]);
  return make_op(std::move(out), {x}, [](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    for (std::int64_t i = 0; i < g.size(); ++i) {
      const double v = p.value[i];
      const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      g[i] += n.grad[i] * s;
    }
  });
}

// --- linear algebra ----------------------------------------------------------

Var linear(const Var& x, const Var& w) {
  AIRCAST_CHECK(w->value.ndim() == 2, ShapeError, "linear weight must be 2-D");
  AIRCAST_CHECK(x->value.ndim() >= 1, ShapeError, "linear input must have rank >= 1");
  const int k = x->value.dim(x->value.ndim() - 1);
  AIRCAST_CHECK(k == w->value.dim(0), ShapeError, "linear: inner dimensions disagree");
  const int n_out = w->value.dim(1);
  const std::int64_t m = x->value.size() / k;

  std::vector<int> out_shape = x->value.shape();
  out_shape.back() = n_out;
  Tensor out(out_shape);
  {
    ConstMatMap A(x->value.data(), m, k);
    ConstMatMap B(w->value.data(), k, n_out);
    MatMap C(out.data(), m, n_out);
    C.noalias() = A * B;
  }
  return make_op(std::move(out), {x, w}, [m, k, n_out](Node& n) {
    Node& px = *n.parents[0];
    Node& pw = *n.parents[1];
    ConstMatMap dC(n.grad.data(), m, n_out);
    if (px.requires_grad) {
      ConstMatMap B(pw.value.data(), k, n_out);
      MatMap dA(px.grad_buffer().data(), m, k);
      dA.noalias() += dC * B.transpose();
    }
    if (pw.requires_grad) {
      ConstMatMap A(px.value.data(), m, k);
      MatMap dB(pw.grad_buffer().data(), k, n_out);
      dB.noalias() += A.transpose() * dC;
    }
  });
}

Var add_channel_bias(const Var& x, const Var& b) {
  const int n_ch = x->value.dim(x->value.ndim() - 1);
  AIRCAST_CHECK(b->value.size() == n_ch, ShapeError, "bias length must match channels");
  Tensor out = x->value;
  const std::int64_t m = out.size() / n_ch;
  for (std::int64_t i = 0; i < m; ++i)
    for (int c = 0; c < n_ch; ++c) out[i * n_ch + c] += b->value[c];
  return make_op(std::move(out), {x, b}, [m, n_ch](Node& n) {
    Node& px = *n.parents[0];
    Node& pb = *n.parents[1];
    if (px.requires_grad) {
      Tensor& g = px.grad_buffer();
      for (std::int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.grad_buffer();
      for (std::int64_t i = 0; i < m; ++i)
        for (int c = 0; c < n_ch; ++c) g[c] += n.grad[i * n_ch + c];
    }
  });
}

// --- spatial -----------------------------------------------------------------

Var im2col(const Var& x, int kernel, int stride) {
  check3d(x, "im2col");
  AIRCAST_CHECK(kernel % 2 == 1, ArgumentError, "im2col kernel must be odd");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  AIRCAST_CHECK(h % stride == 0 && w % stride == 0, ShapeError,
                "spatial dims must divide the stride");
  const int ho = h / stride, wo = w / stride;
  const int pad = (kernel - 1) / 2;
  const int patch = kernel * kernel * c;

  Tensor out({ho, wo, patch});
  const double* src = x->value.data();
  double* dst = out.data();
  for (int i = 0; i < ho; ++i) {
    for (int j = 0; j < wo; ++j) {
      double* cell = dst + (static_cast<std::int64_t>(i) * wo + j) * patch;
      int off = 0;
      for (int di = 0; di < kernel; ++di) {
        const int r = pad_row(stride * i + di - pad, h);
        for (int dj = 0; dj < kernel; ++dj) {
          const int s = pad_col(stride * j + dj - pad, w);
          const double* in_cell = src + (static_cast<std::int64_t>(r) * w + s) * c;
          for (int ch = 0; ch < c; ++ch) cell[off++] = in_cell[ch];
        }
      }
    }
  }
  return make_op(std::move(out), {x}, [h, w, c, ho, wo, kernel, stride, pad, patch](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    const double* gout = n.grad.data();
    for (int i = 0; i < ho; ++i) {
      for (int j = 0; j < wo; ++j) {
        const double* cell = gout + (static_cast<std::int64_t>(i) * wo + j) * patch;
        int off = 0;
        for (int di = 0; di < kernel; ++di) {
          const int r = pad_row(stride * i + di - pad, h);
          for (int dj = 0; dj < kernel; ++dj) {
            const int s = pad_col(stride * j + dj - pad, w);
            double* gin = g.data() + (static_cast<std::int64_t>(r) * w + s) * c;
            for (int ch = 0; ch < c; ++ch) gin[ch] += cell[off++];
          }
        }
      }
    }
  });
}

Var depthwise_conv(const Var& x, const Var& kern, int kernel) {
  check3d(x, "depthwise_conv");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  AIRCAST_CHECK(kern->value.ndim() == 2 && kern->value.dim(0) == kernel * kernel &&
                    kern->value.dim(1) == c,
                ShapeError, "depthwise kernel must be (k*k, c)");
  const int pad = (kernel - 1) / 2;
  Tensor out({h, w, c});
  const double* src = x->value.data();
  const double* kc = kern->value.data();
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double* cell = out.data() + (static_cast<std::int64_t>(i) * w + j) * c;
      for (int di = 0; di < kernel; ++di) {
        const int r = pad_row(i + di - pad, h);
        for (int dj = 0; dj < kernel; ++dj) {
          const int s = pad_col(j + dj - pad, w);
          const double* in_cell = src + (static_cast<std::int64_t>(r) * w + s) * c;
          const double* kk = kc + static_cast<std::int64_t>(di * kernel + dj) * c;
          for (int ch = 0; ch < c; ++ch) cell[ch] += kk[ch] * in_cell[ch];
        }
      }
    }
  }
  return make_op(std::move(out), {x, kern}, [h, w, c, kernel, pad](Node& n) {
    Node& px = *n.parents[0];
    Node& pk = *n.parents[1];
    const double* gout = n.grad.data();
    const double* src = px.value.data();
    const double* kc = pk.value.data();
    double* gx = px.requires_grad ? px.grad_buffer().data() : nullptr;
    double* gk = pk.requires_grad ? pk.grad_buffer().data() : nullptr;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const double* gcell = gout + (static_cast<std::int64_t>(i) * w + j) * c;
        for (int di = 0; di < kernel; ++di) {
          const int r = pad_row(i + di - pad, h);
          for (int dj = 0; dj < kernel; ++dj) {
            const int s = pad_col(j + dj - pad, w);
            const std::int64_t in_off = (static_cast<std::int64_t>(r) * w + s) * c;
            const std::int64_t k_off = static_cast<std::int64_t>(di * kernel + dj) * c;
            if (gx)
              for (int ch = 0; ch < c; ++ch) gx[in_off + ch] += gcell[ch] * kc[k_off + ch];
            if (gk)
              for (int ch = 0; ch < c; ++ch) gk[k_off + ch] += gcell[ch] * src[in_off + ch];
          }
        }
      }
    }
  });
}

Var upsample2x(const Var& x) {
  check3d(x, "upsample2x");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  Tensor out({2 * h, 2 * w, c});
  for (int i = 0; i < 2 * h; ++i) {
    for (int j = 0; j < 2 * w; ++j) {
      const double* src = x->value.data() + (static_cast<std::int64_t>(i / 2) * w + j / 2) * c;
      double* dst = out.data() + (static_cast<std::int64_t>(i) * 2 * w + j) * c;
      for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch];
    }
  }
  return make_op(std::move(out), {x}, [h, w, c](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    for (int i = 0; i < 2 * h; ++i) {
      for (int j = 0; j < 2 * w; ++j) {
        const double* gsrc = n.grad.data() + (static_cast<std::int64_t>(i) * 2 * w + j) * c;
        double* gdst = g.data() + (static_cast<std::int64_t>(i / 2) * w + j / 2) * c;
        for (int ch = 0; ch < c; ++ch) gdst[ch] += gsrc[ch];
      }
    }
  });
}

Var layer_norm_channels(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const int c = x->value.dim(x->value.ndim() - 1);
  AIRCAST_CHECK(gamma->value.size() == c && beta->value.size() == c, ShapeError,
                "layer norm affine params must match channels");
  const std::int64_t m = x->value.size() / c;

  Tensor out(x->value.shape());
  std::vector<double> inv_sd(static_cast<std::size_t>(m));
  std::vector<double> means(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    const double* cell = x->value.data() + i * c;
    double mu = 0.0;
    for (int ch = 0; ch < c; ++ch) mu += cell[ch];
    mu /= c;
    double var = 0.0;
    for (int ch = 0; ch < c; ++ch) var += (cell[ch] - mu) * (cell[ch] - mu);
    var /= c;
    const double rstd = 1.0 / std::sqrt(var + eps);
    means[static_cast<std::size_t>(i)] = mu;
    inv_sd[static_cast<std::size_t>(i)] = rstd;
    double* o = out.data() + i * c;
    for (int ch = 0; ch < c; ++ch)
      o[ch] = (cell[ch] - mu) * rstd * gamma->value[ch] + beta->value[ch];
  }
  return make_op(std::move(out), {x, gamma, beta},
                 [m, c, means = std::move(means), inv_sd = std::move(inv_sd)](Node& n) {
                   Node& px = *n.parents[0];
                   Node& pg = *n.parents[1];
                   Node& pb = *n.parents[2];
                   double* gx = px.requires_grad ? px.grad_buffer().data() : nullptr;
                   double* gg = pg.requires_grad ? pg.grad_buffer().data() : nullptr;
                   double* gb = pb.requires_grad ? pb.grad_buffer().data() : nullptr;
                   std::vector<double> xhat(static_cast<std::size_t>(c));
                   for (std::int64_t i = 0; i < m; ++i) {
                     const double* cell = px.value.data() + i * c;
                     const double* gout = n.grad.data() + i * c;
                     const double mu = means[static_cast<std::size_t>(i)];
                     const double rstd = inv_sd[static_cast<std::size_t>(i)];
                     double m1 = 0.0, m2 = 0.0;
                     for (int ch = 0; ch < c; ++ch) {
                       xhat[static_cast<std::size_t>(ch)] = (cell[ch] - mu) * rstd;
                       const double gch = gout[ch] * pg.value[ch];
                       m1 += gch;
                       m2 += gch * xhat[static_cast<std::size_t>(ch)];
                     }
                     m1 /= c;
                     m2 /= c;
                     for (int ch = 0; ch < c; ++ch) {
                       if (gg) gg[ch] += gout[ch] * xhat[static_cast<std::size_t>(ch)];
                       if (gb) gb[ch] += gout[ch];
                       if (gx) {
                         const double gch = gout[ch] * pg.value[ch];
                         gx[i * c + ch] +=
                             (gch - m1 - xhat[static_cast<std::size_t>(ch)] * m2) * rstd;
                       }
                     }
                   }
                 });
}

Var concat_channels(const Var& a, const Var& b) {
  check3d(a, "concat_channels");
  check3d(b, "concat_channels");
  const int h = a->value.dim(0), w = a->value.dim(1);
  AIRCAST_CHECK(b->value.dim(0) == h && b->value.dim(1) == w, ShapeError,
                "concat_channels spatial dims disagree");
  const int ca = a->value.dim(2), cb = b->value.dim(2);
  Tensor out({h, w, ca + cb});
  const std::int64_t cells = static_cast<std::int64_t>(h) * w;
  for (std::int64_t i = 0; i < cells; ++i) {
    double* dst = out.data() + i * (ca + cb);
    const double* pa = a->value.data() + i * ca;
    const double* pb = b->value.data() + i * cb;
    for (int ch = 0; ch < ca; ++ch) dst[ch] = pa[ch];
    for (int ch = 0; ch < cb; ++ch) dst[ca + ch] = pb[ch];
  }
  return make_op(std::move(out), {a, b}, [cells, ca, cb](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    double* ga = pa.requires_grad ? pa.grad_buffer().data() : nullptr;
    double* gb = pb.requires_grad ? pb.grad_buffer().data() : nullptr;
    for (std::int64_t i = 0; i < cells; ++i) {
      const double* g = n.grad.data() + i * (ca + cb);
      if (ga)
        for (int ch = 0; ch < ca; ++ch) ga[i * ca + ch] += g[ch];
      if (gb)
        for (int ch = 0; ch < cb; ++ch) gb[i * cb + ch] += g[ca + ch];
    }
  });
}

Var channel_select(const Var& a, const Var& b, std::vector<char> take_b) {
  check_same_shape(a->value, b->value, "channel_select");
  const int c = a->value.dim(a->value.ndim() - 1);
  AIRCAST_CHECK(static_cast<int>(take_b.size()) == c, ShapeError,
                "channel mask length must match channels");
  const std::int64_t m = a->value.size() / c;
  Tensor out = a->value;
  for (std::int64_t i = 0; i < m; ++i)
    for (int ch = 0; ch < c; ++ch)
      if (take_b[static_cast<std::size_t>(ch)]) out[i * c + ch] = b->value[i * c + ch];
  return make_op(std::move(out), {a, b}, [m, c, take_b = std::move(take_b)](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    double* ga = pa.requires_grad ? pa.grad_buffer().data() : nullptr;
    double* gb = pb.requires_grad ? pb.grad_buffer().data() : nullptr;
    for (std::int64_t i = 0; i < m; ++i) {
      for (int ch = 0; ch < c; ++ch) {
        const double g = n.grad[i * c + ch];
        if (take_b[static_cast<std::size_t>(ch)]) {
          if (gb) gb[i * c + ch] += g;
        } else if (ga) {
          ga[i * c + ch] += g;
        }
      }
    }
  });
}

Var pad_spatial(const Var& x, int new_h, int new_w) {
  check3d(x, "pad_spatial");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  AIRCAST_CHECK(new_h >= h && new_w >= w, ShapeError, "pad_spatial cannot shrink");
  Tensor out({new_h, new_w, c});
  for (int i = 0; i < new_h; ++i) {
    const int r = std::min(i, h - 1);
    for (int j = 0; j < new_w; ++j) {
      const int s = j % w;
      const double* src = x->value.data() + (static_cast<std::int64_t>(r) * w + s) * c;
      double* dst = out.data() + (static_cast<std::int64_t>(i) * new_w + j) * c;
      for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch];
    }
  }
  return make_op(std::move(out), {x}, [h, w, c, new_h, new_w](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    for (int i = 0; i < new_h; ++i) {
      const int r = std::min(i, h - 1);
      for (int j = 0; j < new_w; ++j) {
        const int s = j % w;
        const double* gsrc = n.grad.data() + (static_cast<std::int64_t>(i) * new_w + j) * c;
        double* gdst = g.data() + (static_cast<std::int64_t>(r) * w + s) * c;
        for (int ch = 0; ch < c; ++ch) gdst[ch] += gsrc[ch];
      }
    }
  });
}

Var crop_spatial(const Var& x, int h, int w) {
  check3d(x, "crop_spatial");
  const int H = x->value.dim(0), W = x->value.dim(1), c = x->value.dim(2);
  AIRCAST_CHECK(h <= H && w <= W, ShapeError, "crop_spatial cannot grow");
  Tensor out({h, w, c});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double* src = x->value.data() + (static_cast<std::int64_t>(i) * W + j) * c;
      double* dst = out.data() + (static_cast<std::int64_t>(i) * w + j) * c;
      for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch];
    }
  return make_op(std::move(out), {x}, [h, w, W, c](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        const double* gsrc = n.grad.data() + (static_cast<std::int64_t>(i) * w + j) * c;
        double* gdst = g.data() + (static_cast<std::int64_t>(i) * W + j) * c;
        for (int ch = 0; ch < c; ++ch) gdst[ch] += gsrc[ch];
      }
  });
}

// --- reductions ----------------------------------------------------------------

Var weighted_colsum(const Var& x, const std::vector<double>& row_w) {
  check3d(x, "weighted_colsum");
  const int h = x->value.dim(0), w = x->value.dim(1), c = x->value.dim(2);
  AIRCAST_CHECK(static_cast<int>(row_w.size()) == h, ShapeError,
                "row weight length must match rows");
  Tensor out({c});
  for (int i = 0; i < h; ++i) {
    const double wi = row_w[static_cast<std::size_t>(i)];
    for (int j = 0; j < w; ++j) {
      const double* cell = x->value.data() + (static_cast<std::int64_t>(i) * w + j) * c;
      for (int ch = 0; ch < c; ++ch) out[ch] += wi * cell[ch];
    }
  }
  return make_op(std::move(out), {x}, [h, w, c, row_w](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    for (int i = 0; i < h; ++i) {
      const double wi = row_w[static_cast<std::size_t>(i)];
      for (int j = 0; j < w; ++j) {
        double* gcell = g.data() + (static_cast<std::int64_t>(i) * w + j) * c;
        for (int ch = 0; ch < c; ++ch) gcell[ch] += wi * n.grad[ch];
      }
    }
  });
}

Var div_by(const Var& v, Tensor denom) {
  check_same_shape(v->value, denom, "div_by");
  Tensor out = v->value;
  for (std::int64_t i = 0; i < out.size(); ++i) out[i] /= denom[i];
  return make_op(std::move(out), {v}, [denom = std::move(denom)](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] / denom[i];
  });
}

Var mean_all(const Var& x) {
  const double inv = 1.0 / static_cast<double>(x->value.size());
  double acc = 0.0;
  for (std::int64_t i = 0; i < x->value.size(); ++i) acc += x->value[i];
  return make_op(Tensor::scalar(acc * inv), {x}, [inv](Node& n) {
    Node& p = *n.parents[0];
    if (!p.requires_grad) return;
    Tensor& g = p.grad_buffer();
    const double gs = n.grad[0] * inv;
    for (std::int64_t i = 0; i < g.size(); ++i) g[i] += gs;
  });
}

}  // namespace aircast::ad
