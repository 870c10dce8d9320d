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

#include <array>
#include <set>

#include <gtest/gtest.h>

#include "gsa/dataset.hpp"
#include "gsa/errors.hpp"

namespace gsa {
namespace {

TEST(ShapesDataset, Deterministic) {
  const SegSample a = gen_shapes_sample(11, 3, 4, 32);
  const SegSample b = gen_shapes_sample(11, 3, 4, 32);
  EXPECT_TRUE(std::equal(a.image.data().begin(), a.image.data().end(), b.image.data().begin()));
  EXPECT_EQ(a.label.data, b.label.data);
  const SegSample c = gen_shapes_sample(11, 4, 4, 32);
  EXPECT_NE(a.label.data, c.label.data);
}

TEST(ShapesDataset, SampleIndependentOfDatasetSize) {
  const auto small = gen_shapes_dataset(3, 3, 24, 9);
  const auto large = gen_shapes_dataset(10, 3, 24, 9);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].label.data, large[i].label.data);
}

TEST(ShapesDataset, ShapesAndRanges) {
  for (int k = 2; k <= kShapeKinds + 1; ++k) {
    const SegSample s = gen_shapes_sample(1, 0, k, 40);
    EXPECT_EQ(s.image.shape(), (Shape{40, 40, 3}));
    EXPECT_EQ(s.label.height, 40);
    EXPECT_EQ(s.label.width, 40);
    for (float v : s.image.data()) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
    for (auto v : s.label.data) EXPECT_LT(v, k);
  }
}

TEST(ShapesDataset, EveryClassAppears) {
  const auto data = gen_shapes_dataset(100, 5, 32, 3);
  std::array<std::int64_t, 5> hist{};
  for (const auto& s : data)
    for (auto v : s.label.data) ++hist[v];
  for (int k = 0; k < 5; ++k) EXPECT_GT(hist[static_cast<std::size_t>(k)], 0) << "class " << k;
  // Background dominates but does not swamp the foreground.
  EXPECT_GT(hist[0], hist[1]);
  EXPECT_LT(hist[0], 100 * 32 * 32 * 95 / 100);
}

TEST(ShapesDataset, RejectsBadArguments) {
  EXPECT_THROW(gen_shapes_sample(0, 0, 1, 32), ContractError);
  EXPECT_THROW(gen_shapes_sample(0, 0, kShapeKinds + 2, 32), ContractError);
  EXPECT_THROW(gen_shapes_sample(0, 0, 3, 15), ContractError);
  EXPECT_THROW(gen_shapes_dataset(2, 3, 8, 0), ContractError);
}

TEST(StackImages, Batches) {
  const auto data = gen_shapes_dataset(2, 3, 16, 1);
  const Tensor b = stack_images({data[0].image, data[1].image});
  EXPECT_EQ(b.shape(), (Shape{2, 16, 16, 3}));
  EXPECT_EQ(b[16 * 16 * 3], data[1].image[0]);
  EXPECT_THROW(stack_images({data[0].image, Tensor({8, 8, 3})}), ContractError);
}

}  // namespace
}  // namespace gsa
