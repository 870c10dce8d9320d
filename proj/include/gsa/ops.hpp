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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsa/tensor.hpp"

// Differentiable kernels. Feature maps are rank-4 (batch, height, width,
// channels). Every op records itself when any input is on a tape.
namespace gsa {

// "same" zero padding. With stride 1 and odd kernels the spatial extent is
// preserved (pad = dilation * (k - 1) / 2 per side); with larger strides the
// output extent is ceil(in / stride) and any odd padding goes to the bottom
// and right.
struct ConvSpec {
  int kh = 3;
  int kw = 3;
  int dilation = 1;
  int stride = 1;
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
};

struct PadInfo {
  std::int64_t out_h, out_w, pad_top, pad_left;
};
PadInfo same_padding(std::int64_t h, std::int64_t w, const ConvSpec& spec);

// x: (B, H, W, in), w: (kh, kw, in, out), b: (out).
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, const ConvSpec& spec);

// (M, K) x (K, N), or batched (B, M, K) x (B, K, N).
Tensor matmul(const Tensor& a, const Tensor& b);
// Swaps the last two axes of a rank-2 or rank-3 tensor.
Tensor transpose(const Tensor& a);

// (B, H, W, C) -> (B, 1, 1, C)
Tensor global_avg_pool(const Tensor& x);
// (B, 1, 1, C) -> (B, H, W, C)
Tensor broadcast_spatial(const Tensor& x, std::int64_t h, std::int64_t w);

// Affine map over the last axis: x (..., din), w (din, dout), b (dout).
Tensor fully_connected(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float s);

// Concatenates along the last axis; all leading extents must match.
Tensor concat_channels(std::span<const Tensor> xs);
Tensor concat_channels(std::initializer_list<Tensor> xs);
// Last-axis window [offset, offset + length).
Tensor slice_channels(const Tensor& x, std::int64_t offset, std::int64_t length);

// x (B, H, W, C) scaled per channel by a (B, C).
Tensor channel_scale(const Tensor& x, const Tensor& a);

// Bilinear resampling with half-pixel centers (align_corners = false).
Tensor resize_bilinear(const Tensor& x, std::int64_t out_h, std::int64_t out_w);
Tensor bilinear_upsample(const Tensor& x, int factor);

Tensor reshape(const Tensor& x, Shape shape);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

}  // namespace gsa
