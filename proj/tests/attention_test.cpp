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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gsa/attention.hpp"
#include "gsa/gradcheck.hpp"
#include "gsa/ops.hpp"

namespace gsa {
namespace {

std::vector<float> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

FcParams random_fc(std::int64_t din, std::int64_t dout, std::uint64_t seed) {
  return {random_uniform({din, dout}, seed), random_uniform({dout}, seed + 1000)};
}

FcParams const_fc(std::int64_t din, std::int64_t dout, float w, float b) {
  return {Tensor({din, dout}, w), Tensor({dout}, b)};
}

BranchSet random_branches(const std::vector<std::int64_t>& widths, std::uint64_t seed,
                          std::int64_t hw = 3) {
  BranchSet bs;
  for (auto c : widths) bs.push_back(random_uniform({2, hw, hw, c}, seed++));
  return bs;
}

SAParams random_sa(const std::vector<std::int64_t>& widths, std::int64_t gamma, std::uint64_t seed) {
  std::int64_t total = 0;
  for (auto c : widths) total += c;
  SAParams p{random_fc(total, gamma, seed), random_fc(gamma, gamma, seed + 1), {}};
  for (auto c : widths) p.heads.push_back(random_fc(gamma, c, seed + 2 + static_cast<std::uint64_t>(c)));
  return p;
}

SADiffuseOnlyParams random_diffuse(const std::vector<std::int64_t>& widths, std::uint64_t seed) {
  SADiffuseOnlyParams p;
  for (auto c : widths) {
    const auto h = default_squeeze_width(c);
    p.squeeze.push_back(random_fc(c, h, seed++));
    p.excite.push_back(random_fc(h, c, seed++));
  }
  return p;
}

std::int64_t count(const FcParams& f) { return f.w.numel() + f.b.numel(); }

TEST(Defaults, Widths) {
  EXPECT_EQ(default_gamma(8), 4);
  EXPECT_EQ(default_gamma(320), 80);
  EXPECT_EQ(default_squeeze_width(64), 16);
  EXPECT_EQ(default_embed_channels(64), 32);
  EXPECT_EQ(default_embed_channels(6), 4);
}

TEST(SaCondense, ZeroInputsZeroCondensate) {
  const BranchSet bs{Tensor({1, 2, 2, 3}), Tensor({1, 2, 2, 2})};
  const SAParams p{random_fc(5, 4, 1), const_fc(4, 4, 0.3f, 0.0f), {}};
  SAParams zb = p;
  zb.fc1.b = Tensor({4});
  const Tensor c = sa_condense(bs, zb);
  EXPECT_EQ(c.shape(), (Shape{1, 4}));
  EXPECT_EQ(values(c), std::vector<float>(4, 0.0f));
}

TEST(SaCondense, SinglePixelComposesAffineMaps) {
  // Two 1x1 branches with one channel each, gamma = hidden = 1.
  const BranchSet bs{Tensor({1, 1, 1, 1}, 2.0f), Tensor({1, 1, 1, 1}, -1.0f)};
  const SAParams p{{Tensor({2, 1}, std::vector<float>{0.5f, 3.0f}), Tensor({1}, 1.0f)},
                   {Tensor({1, 1}, -2.0f), Tensor({1}, 0.25f)},
                   {}};
  // fc1: 0.5 * 2 + 3 * -1 + 1 = -1 -> relu 0 -> fc2: 0.25
  EXPECT_EQ(sa_condense(bs, p).item(), 0.25f);
  SAParams q = p;
  q.fc1.b = Tensor({1}, 4.0f);  // fc1: 2 -> fc2: -4 + 0.25
  EXPECT_EQ(sa_condense(bs, q).item(), -3.75f);
}

TEST(SaDiffuse, ZeroCondensateGivesHalf) {
  SAParams p = random_sa({2, 3, 5}, 4, 1);
  for (auto& h : p.heads) h.b = Tensor({h.b.numel()});
  const auto att = sa_diffuse(Tensor({2, 4}), p);
  ASSERT_EQ(att.size(), 3u);
  EXPECT_EQ(att[0].shape(), (Shape{2, 2}));
  EXPECT_EQ(att[1].shape(), (Shape{2, 3}));
  EXPECT_EQ(att[2].shape(), (Shape{2, 5}));
  for (const auto& a : att)
    for (float v : a.data()) EXPECT_EQ(v, 0.5f);
  EXPECT_THROW(sa_diffuse(Tensor({2, 3}), p), ContractError);
}

TEST(SaDiffuse, MonotoneInBias) {
  SAParams p = random_sa({2, 2}, 4, 3);
  const Tensor c = random_uniform({1, 4}, 9);
  float prev = -1;
  for (float bias : {-4.0f, 0.0f, 4.0f, 40.0f}) {
    p.heads[0].b = Tensor({2}, bias);
    const float a = sa_diffuse(c, p)[0][0];
    EXPECT_GT(a, prev);
    EXPECT_LE(a, 1.0f);
    prev = a;
  }
  EXPECT_EQ(prev, 1.0f);
}

TEST(SelectiveAttention, UnitAttentionIsConcat) {
  const std::vector<std::int64_t> widths{3, 4, 2};
  const BranchSet bs = random_branches(widths, 5);
  SAParams p = random_sa(widths, 4, 6);
  for (std::size_t i = 0; i < widths.size(); ++i) p.heads[i] = const_fc(4, widths[i], 0.0f, 100.0f);
  const Tensor y = selective_attention(bs, p);
  EXPECT_EQ(y.shape(), (Shape{2, 3, 3, 9}));
  EXPECT_EQ(values(y), values(concat_channels(std::span<const Tensor>(bs))));
}

TEST(SelectiveAttention, ZeroAttentionAnnihilatesBranch) {
  const std::vector<std::int64_t> widths{3, 4};
  const BranchSet bs = random_branches(widths, 5);
  SAParams p = random_sa(widths, 4, 6);
  p.heads[1] = const_fc(4, 4, 0.0f, -100.0f);
  const Tensor y = selective_attention(bs, p);
  for (std::int64_t i = 0; i < y.numel(); ++i) {
    if (i % 7 >= 3) EXPECT_NEAR(y[i], 0.0f, 1e-30f);
  }
}

TEST(SelectiveAttention, NeedsTwoBranchesAndMatchingHeads) {
  const BranchSet one = random_branches({3}, 1);
  EXPECT_THROW(selective_attention(one, random_sa({3}, 4, 1)), ContractError);
  const BranchSet two = random_branches({3, 2}, 1);
  EXPECT_THROW(selective_attention(two, random_sa({3, 2, 2}, 4, 1)), ContractError);
  const BranchSet ragged{random_uniform({1, 3, 3, 2}, 1), random_uniform({1, 2, 3, 2}, 2)};
  EXPECT_THROW(check_branches(ragged), ContractError);
}

// |d attention_0 / d branch_1| by central differences over every entry.
template <typename Attn>
double cross_sensitivity(BranchSet bs, Attn attn) {
  const double h = 1e-2;
  double worst = 0;
  for (std::int64_t j = 0; j < bs[1].numel(); ++j) {
    std::vector<float> up(bs[1].data().begin(), bs[1].data().end()), down = up;
    up[static_cast<std::size_t>(j)] += static_cast<float>(h);
    down[static_cast<std::size_t>(j)] -= static_cast<float>(h);
    BranchSet bu = bs, bd = bs;
    bu[1] = Tensor(bs[1].shape(), up);
    bd[1] = Tensor(bs[1].shape(), down);
    const Tensor au = attn(bu)[0], ad = attn(bd)[0];
    for (std::int64_t i = 0; i < au.numel(); ++i) {
      worst = std::max(worst, std::abs(double{au[i]} - ad[i]) / (2 * h));
    }
  }
  return worst;
}

TEST(CrossBranch, FullSaCouplesBranches) {
  const std::vector<std::int64_t> widths{3, 4, 2};
  const SAParams p = random_sa(widths, 4, 11);
  const double s = cross_sensitivity(random_branches(widths, 12),
                                     [&](const BranchSet& b) { return sa_attentions(b, p); });
  EXPECT_GT(s, 1e-8);
}

TEST(CrossBranch, CondenseOnlyCouplesBranches) {
  const std::vector<std::int64_t> widths{3, 4};
  const SACondenseOnlyParams p{random_fc(7, 4, 1), random_fc(4, 4, 2), random_fc(4, 7, 3)};
  const double s = cross_sensitivity(random_branches(widths, 12), [&](const BranchSet& b) {
    return sa_attentions_condense_only(b, p);
  });
  EXPECT_GT(s, 1e-8);
}

TEST(CrossBranch, DiffuseOnlyIsIsolated) {
  const std::vector<std::int64_t> widths{3, 4, 2};
  const SADiffuseOnlyParams p = random_diffuse(widths, 13);
  const double s = cross_sensitivity(random_branches(widths, 14), [&](const BranchSet& b) {
    return sa_attentions_diffuse_only(b, p);
  });
  EXPECT_EQ(s, 0.0);
}

TEST(CondenseOnly, ShapesAndHalfAtZero) {
  const std::vector<std::int64_t> widths{3, 5};
  const BranchSet bs{Tensor({2, 2, 2, 3}), Tensor({2, 2, 2, 5})};
  SACondenseOnlyParams p{random_fc(8, 4, 1), random_fc(4, 4, 2), random_fc(4, 8, 3)};
  p.fc1.b = Tensor({4});
  p.fc2.b = Tensor({4});
  p.joint.b = Tensor({8});
  const auto att = sa_attentions_condense_only(bs, p);
  ASSERT_EQ(att.size(), 2u);
  EXPECT_EQ(att[0].shape(), (Shape{2, 3}));
  EXPECT_EQ(att[1].shape(), (Shape{2, 5}));
  for (const auto& a : att)
    for (float v : a.data()) EXPECT_EQ(v, 0.5f);
  EXPECT_EQ(selective_attention_condense_only(bs, p).shape(), (Shape{2, 2, 2, 8}));
}

TEST(CondenseOnly, ParameterCountVersusFull) {
  // One joint gamma -> sum C head replaces n per-branch gamma -> C_i heads:
  // (n - 1) fewer FC layers, the same number of weights and biases.
  const std::vector<std::int64_t> widths{64, 64, 64, 64, 64};
  const std::int64_t total = 320, gamma = default_gamma(total);
  const SAParams full = random_sa(widths, gamma, 1);
  const SACondenseOnlyParams co{random_fc(total, gamma, 1), random_fc(gamma, gamma, 2),
                                random_fc(gamma, total, 3)};
  std::int64_t full_count = count(full.fc1) + count(full.fc2);
  for (const auto& h : full.heads) full_count += count(h);
  const std::int64_t co_count = count(co.fc1) + count(co.fc2) + count(co.joint);
  EXPECT_EQ(full.heads.size() - 1, widths.size() - 1);
  EXPECT_EQ(full_count, total * gamma + gamma + gamma * gamma + gamma + gamma * total + total);
  EXPECT_EQ(co_count, full_count);
}

TEST(DiffuseOnly, UnitAttentionIsConcat) {
  const std::vector<std::int64_t> widths{3, 4};
  const BranchSet bs = random_branches(widths, 2);
  SADiffuseOnlyParams p = random_diffuse(widths, 3);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    p.excite[i] = const_fc(p.excite[i].w.dim(0), widths[i], 0.0f, 100.0f);
  }
  EXPECT_EQ(values(selective_attention_diffuse_only(bs, p)),
            values(concat_channels(std::span<const Tensor>(bs))));
}

GafParams random_gaf(std::int64_t c, std::int64_t ce, std::uint64_t seed) {
  return {random_uniform({1, 1, c, ce}, seed), random_uniform({ce}, seed + 1),
          random_uniform({1, 1, c, c}, seed + 2), random_uniform({c}, seed + 3)};
}

TEST(Gaf, ZeroValueIsIdentity) {
  const Tensor x = random_uniform({2, 3, 4, 6}, 1);
  GafParams p = random_gaf(6, 4, 2);
  p.value_w = Tensor({1, 1, 6, 6});
  p.value_b = Tensor({6});
  for (auto mode : {AttentionMode::softmax, AttentionMode::sparsemax}) {
    EXPECT_EQ(values(gaf(x, mode, p).output), values(x));
  }
}

TEST(Gaf, RowsOnSimplexAndShapePreserved) {
  const Tensor x = random_uniform({2, 3, 3, 5}, 3, -2.0f, 2.0f);
  const GafParams p = random_gaf(5, 4, 4);
  for (auto mode : {AttentionMode::softmax, AttentionMode::sparsemax}) {
    const GafResult r = gaf(x, mode, p);
    EXPECT_EQ(r.output.shape(), x.shape());
    EXPECT_EQ(r.raw.shape(), (Shape{2, 9, 9}));
    for (std::int64_t row = 0; row < 18; ++row) {
      double s = 0;
      for (std::int64_t j = 0; j < 9; ++j) {
        s += r.normalized[row * 9 + j];
        EXPECT_GE(r.normalized[row * 9 + j], 0.0f);
      }
      EXPECT_NEAR(s, 1.0, 1e-5);
    }
  }
}

TEST(Gaf, RawIsScaledGram) {
  const Tensor x = random_uniform({1, 2, 2, 3}, 5);
  const GafParams p = random_gaf(3, 4, 6);
  const GafResult r = gaf(x, AttentionMode::softmax, p);
  const Tensor e = conv2d(x, p.qk_w, p.qk_b, {1, 1, 1, 1, 3, 4});
  for (std::int64_t i = 0; i < 4; ++i)
    for (std::int64_t j = 0; j < 4; ++j) {
      double dot = 0;
      for (std::int64_t c = 0; c < 4; ++c) dot += double{e[i * 4 + c]} * e[j * 4 + c];
      EXPECT_NEAR(r.raw[i * 4 + j], dot / 2.0, 1e-5);
    }
}

TEST(Gaf, ConstantInputStaysConstant) {
  const Tensor x({1, 3, 3, 4}, 0.5f);
  const GafParams p = random_gaf(4, 4, 7);
  const GafResult r = gaf(x, AttentionMode::softmax, p);
  for (std::int64_t i = 0; i < 81; ++i) EXPECT_FLOAT_EQ(r.normalized[i], 1.0f / 9.0f);
  for (std::int64_t i = 0; i < r.output.numel(); ++i) EXPECT_EQ(r.output[i], r.output[i % 4]);
}

TEST(Gaf, SinglePixel) {
  const Tensor x = random_uniform({1, 1, 1, 4}, 8);
  const GafParams p = random_gaf(4, 4, 9);
  for (auto mode : {AttentionMode::softmax, AttentionMode::sparsemax}) {
    const GafResult r = gaf(x, mode, p);
    EXPECT_EQ(r.normalized.item(), 1.0f);
    const Tensor v = conv2d(x, p.value_w, p.value_b, {1, 1, 1, 1, 4, 4});
    EXPECT_EQ(values(r.output), values(add(x, v)));
  }
}

TEST(Gaf, SparsemaxZerosDissimilarPixels) {
  // 2x2 map, one outlier pixel: identity query/key embedding.
  std::vector<float> xs(16, 0.0f);
  for (int p = 0; p < 3; ++p) xs[static_cast<std::size_t>(p * 4)] = 1.0f;
  xs[3 * 4 + 1] = 4.0f;
  const Tensor x({1, 2, 2, 4}, xs);
  std::vector<float> eye(16, 0.0f);
  for (int i = 0; i < 4; ++i) eye[static_cast<std::size_t>(i * 5)] = 1.0f;
  const GafParams p{Tensor({1, 1, 4, 4}, eye), Tensor({4}), Tensor({1, 1, 4, 4}, eye), Tensor({4})};
  auto zeros = [&](AttentionMode m) {
    int z = 0;
    for (float v : gaf(x, m, p).normalized.data()) z += v == 0.0f;
    return z;
  };
  EXPECT_GT(zeros(AttentionMode::sparsemax), 0);
  EXPECT_EQ(zeros(AttentionMode::softmax), 0);
}

TEST(Gaf, ValueMustMapBackToInputWidth) {
  GafParams p = random_gaf(4, 4, 1);
  p.value_w = Tensor({1, 1, 4, 3});
  p.value_b = Tensor({3});
  EXPECT_THROW(gaf(Tensor({1, 2, 2, 4}), AttentionMode::softmax, p), ContractError);
}

}  // namespace
}  // namespace gsa
