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

#include "gsa/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "gsa/params.hpp"

namespace gsa {
namespace {

using Color = std::array<double, 3>;

struct Shape2D {
  int kind;  // 0 rectangle, 1 circle, 2 triangle, 3 diamond, 4 ring, 5 cross
  double cx, cy, rx, ry;
};

bool covers(const Shape2D& s, double x, double y) {
  const double dx = x - s.cx, dy = y - s.cy;
  switch (s.kind) {
    case 0:
      return std::abs(dx) <= s.rx && std::abs(dy) <= s.ry;
    case 1:
      return dx * dx + dy * dy <= s.rx * s.rx;
    case 2: {
      // Upright isosceles triangle: apex at (cx, cy - ry), base at cy + ry.
      if (dy < -s.ry || dy > s.ry) return false;
      const double half_width = s.rx * (dy + s.ry) / (2.0 * s.ry);
      return std::abs(dx) <= half_width;
    }
    case 3:
      return std::abs(dx) / s.rx + std::abs(dy) / s.ry <= 1.0;
    case 4: {
      const double r2 = dx * dx + dy * dy;
      return r2 <= s.rx * s.rx && r2 >= 0.36 * s.rx * s.rx;
    }
    case 5: {
      const double arm = 0.35 * s.rx;
      return (std::abs(dx) <= s.rx && std::abs(dy) <= arm) ||
             (std::abs(dy) <= s.rx && std::abs(dx) <= arm);
    }
  }
  return false;
}

double color_distance(const Color& a, const Color& b) {
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
}

void check_args(int num_classes, std::int64_t size) {
  if (num_classes < 2 || num_classes > kShapeKinds + 1) {
    throw ContractError("shapes dataset supports 2.." + std::to_string(kShapeKinds + 1) +
                        " classes, got " + std::to_string(num_classes));
  }
  if (size < 16) {
    throw ContractError("shapes dataset needs images of at least 16x16, got " +
                        std::to_string(size));
  }
}

}  // namespace

SegSample gen_shapes_sample(std::uint64_t seed, std::int64_t index, int num_classes,
                            std::int64_t size) {
  check_args(num_classes, size);
  std::mt19937_64 rng(derive_seed(derive_seed(seed, "dataset"), std::to_string(index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  const Color background{unit(rng), unit(rng), unit(rng)};
  std::uniform_int_distribution<int> shape_count(2, 4);
  std::uniform_int_distribution<int> shape_class(1, num_classes - 1);
  const int count = shape_count(rng);
  std::vector<std::pair<Shape2D, Color>> shapes;
  std::vector<int> classes;
  const double s = static_cast<double>(size);
  for (int i = 0; i < count; ++i) {
    const int cls = shape_class(rng);
    Shape2D sh;
    sh.kind = cls - 1;
    sh.rx = uniform(s / 10.0, s / 5.0);
    sh.ry = sh.kind == 1 || sh.kind == 4 || sh.kind == 5 ? sh.rx : uniform(s / 10.0, s / 5.0);
    // Shapes do not overlap, so every shape shows its full outline. Give up
    // on a shape that cannot be placed after a few tries.
    bool placed = false;
    for (int attempt = 0; attempt < 32 && !placed; ++attempt) {
      sh.cx = uniform(sh.rx, s - sh.rx);
      sh.cy = uniform(sh.ry, s - sh.ry);
      placed = true;
      for (const auto& [other, oc] : shapes) {
        if (std::abs(sh.cx - other.cx) < sh.rx + other.rx + 2.0 &&
            std::abs(sh.cy - other.cy) < sh.ry + other.ry + 2.0) {
          placed = false;
          break;
        }
      }
    }
    if (!placed) continue;
    Color c{};
    do {
      c = {unit(rng), unit(rng), unit(rng)};
    } while (color_distance(c, background) < 0.6);
    shapes.push_back({sh, c});
    classes.push_back(cls);
  }

  std::normal_distribution<double> noise(0.0, 0.03);
  std::vector<float> pixels(static_cast<std::size_t>(size * size * 3));
  LabelMap label{size, size, std::vector<std::uint8_t>(static_cast<std::size_t>(size * size), 0)};
  for (std::int64_t y = 0; y < size; ++y) {
    for (std::int64_t x = 0; x < size; ++x) {
      Color c = background;
      std::uint8_t cls = 0;
      for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (covers(shapes[i].first, static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5)) {
          c = shapes[i].second;
          cls = static_cast<std::uint8_t>(classes[i]);
        }
      }
      label.data[static_cast<std::size_t>(y * size + x)] = cls;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = std::clamp(c[static_cast<std::size_t>(ch)] + noise(rng), 0.0, 1.0);
        pixels[static_cast<std::size_t>((y * size + x) * 3 + ch)] =
            static_cast<float>(std::round(v * 255.0)) / 255.0f;
      }
    }
  }
  return {Tensor({size, size, 3}, std::move(pixels)), std::move(label)};
}

std::vector<SegSample> gen_shapes_dataset(std::int64_t n_samples, int num_classes,
                                          std::int64_t size, std::uint64_t seed) {
  check_args(num_classes, size);
  if (n_samples < 0) throw ContractError("sample count must be non-negative");
  std::vector<SegSample> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  for (std::int64_t i = 0; i < n_samples; ++i) {
    out.push_back(gen_shapes_sample(seed, i, num_classes, size));
  }
  return out;
}

Tensor stack_images(const std::vector<Tensor>& images) {
  if (images.empty()) throw ContractError("stack_images: no images");
  const Shape& s = images[0].shape();
  if (s.size() != 3) throw ContractError("stack_images: expected (H, W, C) images");
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(images[0].numel()) * images.size());
  for (const auto& im : images) {
    if (im.shape() != s) {
      throw ContractError("stack_images: shape mismatch " + shape_str(s) + " vs " +
                          shape_str(im.shape()));
    }
    data.insert(data.end(), im.data().begin(), im.data().end());
  }
  return Tensor({static_cast<std::int64_t>(images.size()), s[0], s[1], s[2]}, std::move(data));
}

}  // namespace gsa
