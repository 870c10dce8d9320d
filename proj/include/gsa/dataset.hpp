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
#include <vector>

#include "gsa/tensor.hpp"

namespace gsa {

inline constexpr std::uint8_t kIgnoreLabel = 255;

// Row-major class ids; kIgnoreLabel marks unscored pixels.
struct LabelMap {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t at(std::int64_t y, std::int64_t x) const {
    return data[static_cast<std::size_t>(y * width + x)];
  }
};

struct SegSample {
  Tensor image;  // (H, W, 3), values in [0, 1]
  LabelMap label;
};

// Number of distinct shape kinds the generator can draw; num_classes may be
// at most one more than this (class 0 is background).
inline constexpr int kShapeKinds = 6;

// Sample `index` of the synthetic shapes set. Class 0 is background; class k
// is shape kind k - 1 (rectangle, circle, triangle, diamond, ring, cross).
// Pixel values are multiples of 1/255 so an image survives a PPM round trip
// unchanged. Pure function of its arguments.
SegSample gen_shapes_sample(std::uint64_t seed, std::int64_t index, int num_classes,
                            std::int64_t size);

// ContractError for num_classes outside [2, kShapeKinds + 1] or size < 16.
std::vector<SegSample> gen_shapes_dataset(std::int64_t n_samples, int num_classes,
                                          std::int64_t size, std::uint64_t seed);

// Stacks (H, W, 3) images into (B, H, W, 3).
Tensor stack_images(const std::vector<Tensor>& images);

}  // namespace gsa
