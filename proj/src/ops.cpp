/* Copyright 2026 The gsaseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "gsa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsa/simd.hpp"

namespace gsa {
namespace {

using Vec = std::vector<float>;
using Sinks = std::span<std::vector<float>* const>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ContractError(msg);
}

void require_rank(const Tensor& t, int rank, const char* op) {
  require(t.defined(), std::string(op) + ": undefined tensor");
  require(t.rank() == rank, std::string(op) + ": expected rank " + std::to_string(rank) +
                                ", got shape " + shape_str(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

std::size_t sz(std::int64_t v) { return static_cast<std::size_t>(v); }

}  // namespace

PadInfo same_padding(std::int64_t h, std::int64_t w, const ConvSpec& spec) {
  const std::int64_t s = spec.stride;
  const std::int64_t out_h = (h + s - 1) / s;
  const std::int64_t out_w = (w + s - 1) / s;
  const std::int64_t eff_h = static_cast<std::int64_t>(spec.dilation) * (spec.kh - 1) + 1;
  const std::int64_t eff_w = static_cast<std::int64_t>(spec.dilation) * (spec.kw - 1) + 1;
  const std::int64_t total_h = std::max<std::int64_t>((out_h - 1) * s + eff_h - h, 0);
  const std::int64_t total_w = std::max<std::int64_t>((out_w - 1) * s + eff_w - w, 0);
  return {out_h, out_w, total_h / 2, total_w / 2};
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, const ConvSpec& spec) {
  require_rank(x, 4, "conv2d input");
  require_rank(w, 4, "conv2d weight");
  require_rank(b, 1, "conv2d bias");
  require(spec.kh > 0 && spec.kw > 0 && spec.dilation > 0 && spec.stride > 0,
          "conv2d: kernel, dilation and stride must be positive");
  const Shape expected_w{spec.kh, spec.kw, spec.in_channels, spec.out_channels};
  require(w.shape() == expected_w, "conv2d: weight shape " + shape_str(w.shape()) +
                                       " does not match spec " + shape_str(expected_w));
  require(x.dim(3) == spec.in_channels, "conv2d: input shape " + shape_str(x.shape()) +
                                            " does not match weight shape " +
                                            shape_str(w.shape()));
  require(b.dim(0) == spec.out_channels, "conv2d: bias shape " + shape_str(b.shape()) +
                                             " does not match weight shape " +
                                             shape_str(w.shape()));

  const std::int64_t B = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::int64_t ci_n = spec.in_channels, co_n = spec.out_channels;
  const PadInfo pad = same_padding(H, W, spec);
  const std::int64_t Ho = pad.out_h, Wo = pad.out_w;
  const auto& k = simd::active();

  // Visits every (output pixel, tap, input pixel) triple inside the image.
  auto for_each_tap = [=](auto&& fn) {
    for (std::int64_t n = 0; n < B; ++n) {
      for (std::int64_t oy = 0; oy < Ho; ++oy) {
        for (std::int64_t ox = 0; ox < Wo; ++ox) {
          const std::int64_t out_px = (n * Ho + oy) * Wo + ox;
          for (int ky = 0; ky < spec.kh; ++ky) {
            const std::int64_t iy = oy * spec.stride - pad.pad_top + ky * spec.dilation;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < spec.kw; ++kx) {
              const std::int64_t ix = ox * spec.stride - pad.pad_left + kx * spec.dilation;
              if (ix < 0 || ix >= W) continue;
              fn(out_px, (n * H + iy) * W + ix, ky * spec.kw + kx);
            }
          }
        }
      }
    }
  };

  const float* xd = x.data().data();
  const float* wd = w.data().data();
  Vec out(sz(B * Ho * Wo * co_n));
  for (std::int64_t p = 0; p < B * Ho * Wo; ++p) {
    std::copy(b.data().begin(), b.data().end(), out.begin() + p * co_n);
  }
  for_each_tap([&](std::int64_t op, std::int64_t ip, std::int64_t tap) {
    const float* xv = xd + ip * ci_n;
    const float* wt = wd + tap * ci_n * co_n;
    float* y = out.data() + op * co_n;
    for (std::int64_t c = 0; c < ci_n; ++c) {
      if (xv[c] != 0.0f) k.axpy(sz(co_n), xv[c], wt + c * co_n, y);
    }
  });

  Tensor result({B, Ho, Wo, co_n}, std::move(out));
  return taped("conv2d", {x, w, b}, result,
               [x, w, for_each_tap, ci_n, co_n](
                   std::span<const float> g, Sinks sinks) {
                 const auto& k = simd::active();
                 const float* xd = x.data().data();
                 const float* wd = w.data().data();
                 if (auto* gx = sinks[0]) {
                   for_each_tap([&](std::int64_t op, std::int64_t ip, std::int64_t tap) {
                     const float* gy = g.data() + op * co_n;
                     const float* wt = wd + tap * ci_n * co_n;
                     float* dx = gx->data() + ip * ci_n;
                     for (std::int64_t c = 0; c < ci_n; ++c) {
                       dx[c] += k.dot(sz(co_n), gy, wt + c * co_n);
                     }
                   });
                 }
                 if (auto* gw = sinks[1]) {
                   for_each_tap([&](std::int64_t op, std::int64_t ip, std::int64_t tap) {
                     const float* gy = g.data() + op * co_n;
                     const float* xv = xd + ip * ci_n;
                     float* dw = gw->data() + tap * ci_n * co_n;
                     for (std::int64_t c = 0; c < ci_n; ++c) {
                       if (xv[c] != 0.0f) k.axpy(sz(co_n), xv[c], gy, dw + c * co_n);
                     }
                   });
                 }
                 if (auto* gb = sinks[2]) {
                   const std::size_t pixels = g.size() / sz(co_n);
                   for (std::size_t p = 0; p < pixels; ++p) {
                     k.add(sz(co_n), gb->data(), g.data() + p * sz(co_n), gb->data());
                   }
                 }
               });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.defined() && b.defined(), "matmul: undefined tensor");
  require(a.rank() == b.rank() && (a.rank() == 2 || a.rank() == 3),
          "matmul: expected two rank-2 or two rank-3 tensors, got " + shape_str(a.shape()) +
              " and " + shape_str(b.shape()));
  const bool batched = a.rank() == 3;
  const std::int64_t batch = batched ? a.dim(0) : 1;
  if (batched) {
    require(b.dim(0) == batch, "matmul: batch mismatch " + shape_str(a.shape()) + " vs " +
                                   shape_str(b.shape()));
  }
  const std::int64_t M = a.dim(-2), K = a.dim(-1), N = b.dim(-1);
  require(b.dim(-2) == K, "matmul: inner dimensions differ, " + shape_str(a.shape()) +
                              " vs " + shape_str(b.shape()));
  const auto& k = simd::active();
  Vec out(sz(batch * M * N), 0.0f);
  const float* ad = a.data().data();
  const float* bd = b.data().data();
  for (std::int64_t n = 0; n < batch; ++n) {
    for (std::int64_t i = 0; i < M; ++i) {
      float* c = out.data() + (n * M + i) * N;
      for (std::int64_t j = 0; j < K; ++j) {
        const float av = ad[(n * M + i) * K + j];
        if (av != 0.0f) k.axpy(sz(N), av, bd + (n * K + j) * N, c);
      }
    }
  }
  Shape shape = batched ? Shape{batch, M, N} : Shape{M, N};
  Tensor result(std::move(shape), std::move(out));
  return taped("matmul", {a, b}, result,
               [a, b, batch, M, K, N](std::span<const float> g, Sinks sinks) {
                 const auto& k = simd::active();
                 const float* ad = a.data().data();
                 const float* bd = b.data().data();
                 for (std::int64_t n = 0; n < batch; ++n) {
                   for (std::int64_t i = 0; i < M; ++i) {
                     const float* gc = g.data() + (n * M + i) * N;
                     if (auto* ga = sinks[0]) {
                       float* da = ga->data() + (n * M + i) * K;
                       for (std::int64_t j = 0; j < K; ++j) {
                         da[j] += k.dot(sz(N), gc, bd + (n * K + j) * N);
                       }
                     }
                     if (auto* gb = sinks[1]) {
                       for (std::int64_t j = 0; j < K; ++j) {
                         const float av = ad[(n * M + i) * K + j];
                         if (av != 0.0f) k.axpy(sz(N), av, gc, gb->data() + (n * K + j) * N);
                       }
                     }
                   }
                 }
               });
}

Tensor transpose(const Tensor& a) {
  require(a.defined() && (a.rank() == 2 || a.rank() == 3),
          "transpose: expected rank 2 or 3, got " + shape_str(a.shape()));
  const std::int64_t batch = a.rank() == 3 ? a.dim(0) : 1;
  const std::int64_t M = a.dim(-2), N = a.dim(-1);
  auto swap = [batch, M, N](const float* src, float* dst, bool accumulate) {
    for (std::int64_t n = 0; n < batch; ++n) {
      for (std::int64_t i = 0; i < M; ++i) {
        for (std::int64_t j = 0; j < N; ++j) {
          float& d = dst[(n * N + j) * M + i];
          const float s = src[(n * M + i) * N + j];
          d = accumulate ? d + s : s;
        }
      }
    }
  };
  Vec out(sz(a.numel()));
  swap(a.data().data(), out.data(), false);
  Shape shape = a.rank() == 3 ? Shape{batch, N, M} : Shape{N, M};
  Tensor result(std::move(shape), std::move(out));
  // The gradient of a transpose is the transpose of the gradient, with the
  // roles of M and N exchanged.
  return taped("transpose", {a}, result, [batch, M, N](std::span<const float> g, Sinks sinks) {
    for (std::int64_t n = 0; n < batch; ++n) {
      for (std::int64_t j = 0; j < N; ++j) {
        for (std::int64_t i = 0; i < M; ++i) {
          (*sinks[0])[sz((n * M + i) * N + j)] += g[sz((n * N + j) * M + i)];
        }
      }
    }
  });
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 4, "global_avg_pool");
  const std::int64_t B = x.dim(0), HW = x.dim(1) * x.dim(2), C = x.dim(3);
  // Double accumulation: the mean of HW copies of v is exactly v.
  Vec out(sz(B * C));
  std::vector<double> acc(sz(C));
  for (std::int64_t n = 0; n < B; ++n) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::int64_t p = 0; p < HW; ++p) {
      const float* row = x.data().data() + (n * HW + p) * C;
      for (std::int64_t c = 0; c < C; ++c) acc[sz(c)] += row[c];
    }
    for (std::int64_t c = 0; c < C; ++c) {
      out[sz(n * C + c)] = static_cast<float>(acc[sz(c)] / static_cast<double>(HW));
    }
  }
  Tensor result({B, 1, 1, C}, std::move(out));
  return taped("global_avg_pool", {x}, result, [B, HW, C](std::span<const float> g, Sinks s) {
    const float inv = 1.0f / static_cast<float>(HW);
    for (std::int64_t n = 0; n < B; ++n) {
      for (std::int64_t p = 0; p < HW; ++p) {
        for (std::int64_t c = 0; c < C; ++c) {
          (*s[0])[sz((n * HW + p) * C + c)] += g[sz(n * C + c)] * inv;
        }
      }
    }
  });
}

Tensor broadcast_spatial(const Tensor& x, std::int64_t h, std::int64_t w) {
  require_rank(x, 4, "broadcast_spatial");
  require(x.dim(1) == 1 && x.dim(2) == 1,
          "broadcast_spatial: expected (B, 1, 1, C), got " + shape_str(x.shape()));
  const std::int64_t B = x.dim(0), C = x.dim(3), HW = h * w;
  Vec out(sz(B * HW * C));
  for (std::int64_t n = 0; n < B; ++n) {
    for (std::int64_t p = 0; p < HW; ++p) {
      std::copy_n(x.data().begin() + n * C, C, out.begin() + (n * HW + p) * C);
    }
  }
  Tensor result({B, h, w, C}, std::move(out));
  return taped("broadcast_spatial", {x}, result, [B, HW, C](std::span<const float> g, Sinks s) {
    const auto& k = simd::active();
    for (std::int64_t n = 0; n < B; ++n) {
      float* acc = s[0]->data() + n * C;
      for (std::int64_t p = 0; p < HW; ++p) k.add(sz(C), acc, g.data() + (n * HW + p) * C, acc);
    }
  });
}

Tensor fully_connected(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(x.defined() && x.rank() >= 1, "fully_connected: input must have rank >= 1");
  require_rank(w, 2, "fully_connected weight");
  require_rank(b, 1, "fully_connected bias");
  const std::int64_t din = x.dim(-1), dout = w.dim(1);
  require(w.dim(0) == din, "fully_connected: input shape " + shape_str(x.shape()) +
                               " does not match weight shape " + shape_str(w.shape()));
  require(b.dim(0) == dout, "fully_connected: bias shape " + shape_str(b.shape()) +
                                " does not match weight shape " + shape_str(w.shape()));
  const std::int64_t rows = x.numel() / din;
  const auto& k = simd::active();
  Vec out(sz(rows * dout));
  const float* xd = x.data().data();
  const float* wd = w.data().data();
  for (std::int64_t r = 0; r < rows; ++r) {
    float* y = out.data() + r * dout;
    std::copy(b.data().begin(), b.data().end(), y);
    for (std::int64_t i = 0; i < din; ++i) {
      const float xv = xd[r * din + i];
      if (xv != 0.0f) k.axpy(sz(dout), xv, wd + i * dout, y);
    }
  }
  Shape shape = x.shape();
  shape.back() = dout;
  Tensor result(std::move(shape), std::move(out));
  return taped("fully_connected", {x, w, b}, result,
               [x, w, rows, din, dout](std::span<const float> g, Sinks s) {
                 const auto& k = simd::active();
                 const float* xd = x.data().data();
                 const float* wd = w.data().data();
                 for (std::int64_t r = 0; r < rows; ++r) {
                   const float* gy = g.data() + r * dout;
                   if (s[0]) {
                     for (std::int64_t i = 0; i < din; ++i) {
                       (*s[0])[sz(r * din + i)] += k.dot(sz(dout), gy, wd + i * dout);
                     }
                   }
                   if (s[1]) {
                     for (std::int64_t i = 0; i < din; ++i) {
                       const float xv = xd[r * din + i];
                       if (xv != 0.0f) k.axpy(sz(dout), xv, gy, s[1]->data() + i * dout);
                     }
                   }
                   if (s[2]) k.add(sz(dout), s[2]->data(), gy, s[2]->data());
                 }
               });
}

Tensor relu(const Tensor& x) {
  Vec out(x.data().begin(), x.data().end());
  for (auto& v : out) v = v > 0.0f ? v : 0.0f;
  Tensor result(x.shape(), std::move(out));
  return taped("relu", {x}, result, [x](std::span<const float> g, Sinks s) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[static_cast<std::int64_t>(i)] > 0.0f) (*s[0])[i] += g[i];
    }
  });
}

Tensor sigmoid(const Tensor& x) {
  Vec out(sz(x.numel()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float v = x.data()[i];
    if (v >= 0.0f) {
      out[i] = 1.0f / (1.0f + std::exp(-v));
    } else {
      const float e = std::exp(v);
      out[i] = e / (1.0f + e);
    }
  }
  Tensor result(x.shape(), std::move(out));
  return taped("sigmoid", {x}, result, [result](std::span<const float> g, Sinks s) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const float y = result.data()[i];
      (*s[0])[i] += g[i] * y * (1.0f - y);
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Vec out(sz(a.numel()));
  simd::active().add(out.size(), a.data().data(), b.data().data(), out.data());
  Tensor result(a.shape(), std::move(out));
  return taped("add", {a, b}, result, [](std::span<const float> g, Sinks s) {
    for (auto* sink : s) {
      if (sink) simd::active().add(g.size(), sink->data(), g.data(), sink->data());
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Vec out(sz(a.numel()));
  simd::active().mul(out.size(), a.data().data(), b.data().data(), out.data());
  Tensor result(a.shape(), std::move(out));
  return taped("mul", {a, b}, result, [a, b](std::span<const float> g, Sinks s) {
    if (s[0]) {
      for (std::size_t i = 0; i < g.size(); ++i) (*s[0])[i] += g[i] * b.data()[i];
    }
    if (s[1]) {
      for (std::size_t i = 0; i < g.size(); ++i) (*s[1])[i] += g[i] * a.data()[i];
    }
  });
}

Tensor scale(const Tensor& x, float factor) {
  Vec out(x.data().begin(), x.data().end());
  simd::active().scale(out.size(), factor, out.data());
  Tensor result(x.shape(), std::move(out));
  return taped("scale", {x}, result, [factor](std::span<const float> g, Sinks s) {
    simd::active().axpy(g.size(), factor, g.data(), s[0]->data());
  });
}

Tensor concat_channels(std::span<const Tensor> xs) {
  require(!xs.empty(), "concat_channels: no inputs");
  Shape lead = xs[0].shape();
  require(!lead.empty(), "concat_channels: inputs must have rank >= 1");
  lead.pop_back();
  std::vector<std::int64_t> widths;
  std::int64_t total = 0;
  for (const auto& x : xs) {
    Shape l = x.shape();
    require(!l.empty(), "concat_channels: inputs must have rank >= 1");
    const std::int64_t c = l.back();
    l.pop_back();
    require(l == lead, "concat_channels: leading extents differ, " + shape_str(xs[0].shape()) +
                           " vs " + shape_str(x.shape()));
    widths.push_back(c);
    total += c;
  }
  const std::int64_t rows = shape_numel(lead);
  Vec out(sz(rows * total));
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::int64_t c = widths[i];
    for (std::int64_t r = 0; r < rows; ++r) {
      std::copy_n(xs[i].data().begin() + r * c, c, out.begin() + r * total + offset);
    }
    offset += c;
  }
  Shape shape = lead;
  shape.push_back(total);
  Tensor result(std::move(shape), std::move(out));
  return taped("concat_channels", xs, result,
               [widths, rows, total](std::span<const float> g, Sinks s) {
                 std::int64_t offset = 0;
                 for (std::size_t i = 0; i < widths.size(); ++i) {
                   const std::int64_t c = widths[i];
                   if (s[i]) {
                     for (std::int64_t r = 0; r < rows; ++r) {
                       for (std::int64_t j = 0; j < c; ++j) {
                         (*s[i])[sz(r * c + j)] += g[sz(r * total + offset + j)];
                       }
                     }
                   }
                   offset += c;
                 }
               });
}

Tensor concat_channels(std::initializer_list<Tensor> xs) {
  return concat_channels(std::span<const Tensor>(xs.begin(), xs.size()));
}

Tensor slice_channels(const Tensor& x, std::int64_t offset, std::int64_t length) {
  require(x.defined() && x.rank() >= 1, "slice_channels: input must have rank >= 1");
  const std::int64_t c = x.dim(-1);
  require(offset >= 0 && length > 0 && offset + length <= c,
          "slice_channels: window [" + std::to_string(offset) + ", " +
              std::to_string(offset + length) + ") outside shape " + shape_str(x.shape()));
  const std::int64_t rows = x.numel() / c;
  Vec out(sz(rows * length));
  for (std::int64_t r = 0; r < rows; ++r) {
    std::copy_n(x.data().begin() + r * c + offset, length, out.begin() + r * length);
  }
  Shape shape = x.shape();
  shape.back() = length;
  Tensor result(std::move(shape), std::move(out));
  return taped("slice_channels", {x}, result,
               [rows, c, offset, length](std::span<const float> g, Sinks s) {
                 for (std::int64_t r = 0; r < rows; ++r) {
                   for (std::int64_t j = 0; j < length; ++j) {
                     (*s[0])[sz(r * c + offset + j)] += g[sz(r * length + j)];
                   }
                 }
               });
}

Tensor channel_scale(const Tensor& x, const Tensor& a) {
  require_rank(x, 4, "channel_scale input");
  require_rank(a, 2, "channel_scale attention");
  const std::int64_t B = x.dim(0), HW = x.dim(1) * x.dim(2), C = x.dim(3);
  require(a.dim(0) == B && a.dim(1) == C, "channel_scale: attention shape " +
                                              shape_str(a.shape()) + " does not match input " +
                                              shape_str(x.shape()));
  const auto& k = simd::active();
  Vec out(sz(x.numel()));
  for (std::int64_t n = 0; n < B; ++n) {
    for (std::int64_t p = 0; p < HW; ++p) {
      const std::int64_t off = (n * HW + p) * C;
      k.mul(sz(C), x.data().data() + off, a.data().data() + n * C, out.data() + off);
    }
  }
  Tensor result(x.shape(), std::move(out));
  return taped("channel_scale", {x, a}, result,
               [x, a, B, HW, C](std::span<const float> g, Sinks s) {
                 for (std::int64_t n = 0; n < B; ++n) {
                   for (std::int64_t p = 0; p < HW; ++p) {
                     const std::int64_t off = (n * HW + p) * C;
                     for (std::int64_t c = 0; c < C; ++c) {
                       const float gv = g[sz(off + c)];
                       if (s[0]) (*s[0])[sz(off + c)] += gv * a[n * C + c];
                       if (s[1]) (*s[1])[sz(n * C + c)] += gv * x[off + c];
                     }
                   }
                 }
               });
}

namespace {

struct Tap {
  std::int64_t lo, hi;
  float frac;
};

// Source taps along one axis for half-pixel-centered resampling.
std::vector<Tap> bilinear_taps(std::int64_t in, std::int64_t out) {
  std::vector<Tap> taps(sz(out));
  const double ratio = static_cast<double>(in) / static_cast<double>(out);
  for (std::int64_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    if (src < 0.0) src = 0.0;
    auto lo = static_cast<std::int64_t>(std::floor(src));
    lo = std::min(lo, in - 1);
    const std::int64_t hi = std::min(lo + 1, in - 1);
    taps[sz(i)] = {lo, hi, static_cast<float>(src - static_cast<double>(lo))};
  }
  return taps;
}

}  // namespace

Tensor resize_bilinear(const Tensor& x, std::int64_t out_h, std::int64_t out_w) {
  require_rank(x, 4, "resize_bilinear");
  require(out_h > 0 && out_w > 0, "resize_bilinear: output extents must be positive");
  const std::int64_t B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const auto ty = bilinear_taps(H, out_h);
  const auto tx = bilinear_taps(W, out_w);
  const float* xd = x.data().data();
  Vec out(sz(B * out_h * out_w * C));
  for (std::int64_t n = 0; n < B; ++n) {
    for (std::int64_t oy = 0; oy < out_h; ++oy) {
      const Tap& a = ty[sz(oy)];
      for (std::int64_t ox = 0; ox < out_w; ++ox) {
        const Tap& b = tx[sz(ox)];
        const float* p00 = xd + ((n * H + a.lo) * W + b.lo) * C;
        const float* p01 = xd + ((n * H + a.lo) * W + b.hi) * C;
        const float* p10 = xd + ((n * H + a.hi) * W + b.lo) * C;
        const float* p11 = xd + ((n * H + a.hi) * W + b.hi) * C;
        float* y = out.data() + ((n * out_h + oy) * out_w + ox) * C;
        for (std::int64_t c = 0; c < C; ++c) {
          const float top = p00[c] + b.frac * (p01[c] - p00[c]);
          const float bot = p10[c] + b.frac * (p11[c] - p10[c]);
          y[c] = top + a.frac * (bot - top);
        }
      }
    }
  }
  Tensor result({B, out_h, out_w, C}, std::move(out));
  return taped("resize_bilinear", {x}, result,
               [ty, tx, B, H, W, C, out_h, out_w](std::span<const float> g, Sinks s) {
                 float* gx = s[0]->data();
                 for (std::int64_t n = 0; n < B; ++n) {
                   for (std::int64_t oy = 0; oy < out_h; ++oy) {
                     const Tap& a = ty[sz(oy)];
                     for (std::int64_t ox = 0; ox < out_w; ++ox) {
                       const Tap& b = tx[sz(ox)];
                       const float* gy = g.data() + ((n * out_h + oy) * out_w + ox) * C;
                       const float w00 = (1 - a.frac) * (1 - b.frac), w01 = (1 - a.frac) * b.frac;
                       const float w10 = a.frac * (1 - b.frac), w11 = a.frac * b.frac;
                       float* q00 = gx + ((n * H + a.lo) * W + b.lo) * C;
                       float* q01 = gx + ((n * H + a.lo) * W + b.hi) * C;
                       float* q10 = gx + ((n * H + a.hi) * W + b.lo) * C;
                       float* q11 = gx + ((n * H + a.hi) * W + b.hi) * C;
                       for (std::int64_t c = 0; c < C; ++c) {
                         q00[c] += w00 * gy[c];
                         q01[c] += w01 * gy[c];
                         q10[c] += w10 * gy[c];
                         q11[c] += w11 * gy[c];
                       }
                     }
                   }
                 }
               });
}

Tensor bilinear_upsample(const Tensor& x, int factor) {
  require(factor > 0, "bilinear_upsample: factor must be positive");
  require_rank(x, 4, "bilinear_upsample");
  return resize_bilinear(x, x.dim(1) * factor, x.dim(2) * factor);
}

Tensor reshape(const Tensor& x, Shape shape) {
  Tensor result = x.with_shape(std::move(shape));
  return taped("reshape", {x}, result, [](std::span<const float> g, Sinks s) {
    simd::active().add(g.size(), s[0]->data(), g.data(), s[0]->data());
  });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (float v : x.data()) acc += v;
  Tensor result = Tensor::scalar(static_cast<float>(acc));
  return taped("sum", {x}, result, [](std::span<const float> g, Sinks s) {
    for (auto& v : *s[0]) v += g[0];
  });
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0f / static_cast<float>(x.numel()));
}

}  // namespace gsa
