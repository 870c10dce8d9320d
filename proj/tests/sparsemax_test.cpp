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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gsa/ops.hpp"
#include "gsa/sparsemax.hpp"

namespace gsa {
namespace {

// Simplex projection by bisection on tau: sum_i max(0, z_i - tau) = 1 has a
// unique root in [max z - 1, max z].
std::vector<double> bisection_projection(const std::vector<double>& z) {
  double hi = *std::max_element(z.begin(), z.end());
  double lo = hi - 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double mass = 0;
    for (double v : z) mass += std::max(0.0, v - mid);
    (mass > 1.0 ? lo : hi) = mid;
  }
  const double tau = 0.5 * (lo + hi);
  std::vector<double> p;
  for (double v : z) p.push_back(std::max(0.0, v - tau));
  return p;
}

std::vector<double> rows_of(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

TEST(Sparsemax, UniformPair) {
  const auto p = sparsemax(std::vector<double>{0, 0});
  EXPECT_EQ(p.output, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(p.support_size, 2u);
}

TEST(Sparsemax, HandCaseOneHot) {
  const auto p = sparsemax(std::vector<double>{1.5, 0.2});
  EXPECT_NEAR(p.output[0], 1.0, 1e-9);
  EXPECT_NEAR(p.output[1], 0.0, 1e-9);
  EXPECT_NEAR(p.tau, 0.5, 1e-9);
  EXPECT_EQ(p.support_size, 1u);
  EXPECT_EQ(p.support, (std::vector<std::size_t>{0}));
}

TEST(Sparsemax, HandCaseTwoSupport) {
  const auto p = sparsemax(std::vector<double>{0.1, 1.1, 0.2});
  EXPECT_NEAR(p.output[0], 0.0, 1e-9);
  EXPECT_NEAR(p.output[1], 0.95, 1e-9);
  EXPECT_NEAR(p.output[2], 0.05, 1e-9);
  EXPECT_NEAR(p.tau, 0.15, 1e-9);
  EXPECT_EQ(p.support_size, 2u);
  EXPECT_EQ(p.support, (std::vector<std::size_t>{1, 2}));
}

TEST(Sparsemax, PointOnSimplexIsFixed) {
  for (const auto& z : {std::vector<double>{0.3, 0.7}, std::vector<double>{0.25, 0.5, 0.25},
                        std::vector<double>{0.0, 1.0, 0.0}}) {
    const auto p = sparsemax(z);
    const auto want = bisection_projection(z);
    for (std::size_t i = 0; i < z.size(); ++i) {
      EXPECT_NEAR(p.output[i], z[i], 1e-12);
      EXPECT_NEAR(want[i], z[i], 1e-12);
    }
  }
}

TEST(Sparsemax, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(sparsemax(std::vector<double>{}), ContractError);
  EXPECT_THROW(sparsemax(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}),
               ContractError);
  EXPECT_THROW(sparsemax(std::vector<double>{std::numeric_limits<double>::infinity()}),
               ContractError);
}

TEST(Sparsemax, SingleEntryIsOne) {
  const auto p = sparsemax(std::vector<double>{-42.0});
  EXPECT_EQ(p.output, (std::vector<double>{1.0}));
}

TEST(Sparsemax, MatchesBisectionOracleOnSimplex) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(2, 64);
  std::uniform_real_distribution<double> val(-5, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> z(static_cast<std::size_t>(len(rng)));
    for (auto& v : z) v = val(rng);
    const auto p = sparsemax(z);
    const auto want = bisection_projection(z);
    double total = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      ASSERT_NEAR(p.output[i], want[i], 1e-6);
      ASSERT_GE(p.output[i], 0.0);
      // Outputs are formed in max-shifted coordinates; tau is reported in the
      // caller's, so the identity holds to rounding.
      ASSERT_NEAR(p.output[i], std::max(0.0, z[i] - p.tau), 1e-12);
      if (p.output[i] > 0) ASSERT_GT(z[i], p.tau);
      total += p.output[i];
    }
    ASSERT_NEAR(total, 1.0, 1e-6);
  }
}

TEST(Sparsemax, TranslationInvarianceExactOnDyadicGrid) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> q(-640, 640);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> z(static_cast<std::size_t>(2 + trial % 40));
    for (auto& v : z) v = q(rng) / 128.0;
    const double c = q(rng) / 64.0;
    std::vector<double> shifted = z;
    for (auto& v : shifted) v += c;
    const auto a = sparsemax(z), b = sparsemax(shifted);
    ASSERT_EQ(a.output, b.output);
    ASSERT_EQ(a.support, b.support);
  }
}

TEST(Sparsemax, PermutationEquivariant) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> val(-2, 2);
  std::vector<double> z(17);
  for (auto& v : z) v = val(rng);
  std::vector<std::size_t> perm(z.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> pz(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) pz[i] = z[perm[i]];
  const auto a = sparsemax(z), b = sparsemax(pz);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(b.output[i], a.output[perm[i]]);
}

TEST(Sparsemax, DominantEntryGivesOneHot) {
  const auto p = sparsemax(std::vector<double>{0.3, 2.0, 1.0, -0.5});
  EXPECT_EQ(p.output, (std::vector<double>{0, 1, 0, 0}));
}

TEST(Sparsemax, TieAtBoundaryExcluded) {
  // 1 + 2 * z_(2) == z_(1) + z_(2): the second entry sits exactly on the
  // threshold and stays out of the support.
  const auto p = sparsemax(std::vector<double>{1.0, 0.0});
  EXPECT_EQ(p.support_size, 1u);
  EXPECT_EQ(p.output, (std::vector<double>{1.0, 0.0}));
}

TEST(SparsemaxJvp, FullSupportPair) {
  const auto p = sparsemax(std::vector<double>{0, 0});
  EXPECT_EQ(sparsemax_jvp(p, std::vector<double>{1, 0}), (std::vector<double>{0.5, -0.5}));
}

TEST(SparsemaxJvp, SingleSupportIsZero) {
  const auto p = sparsemax(std::vector<double>{0.0, 3.0, 0.5});
  EXPECT_EQ(sparsemax_jvp(p, std::vector<double>{4, -1, 2}), (std::vector<double>{0, 0, 0}));
}

TEST(SparsemaxJvp, SumsToZeroAndRejectsLengthMismatch) {
  const auto p = sparsemax(std::vector<double>{0.1, 0.4, 0.3, -2.0});
  const auto out = sparsemax_jvp(p, std::vector<double>{0.7, -1.3, 2.2, 5.0});
  EXPECT_NEAR(std::accumulate(out.begin(), out.end(), 0.0), 0.0, 1e-15);
  EXPECT_EQ(out[3], 0.0);
  EXPECT_THROW(sparsemax_jvp(p, std::vector<double>{1.0}), ContractError);
}

TEST(SparsemaxJvp, MatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> val(-1, 1);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> z(8), v(8);
    for (auto& x : z) x = val(rng);
    for (auto& x : v) x = val(rng);
    const auto p = sparsemax(z);
    // Skip points within 1e-4 of a support change.
    bool near_kink = false;
    for (double x : z) near_kink = near_kink || std::abs(x - p.tau) < 1e-4;
    if (near_kink) continue;
    const double h = 1e-6;
    std::vector<double> zp = z, zm = z;
    for (std::size_t i = 0; i < z.size(); ++i) {
      zp[i] += h * v[i];
      zm[i] -= h * v[i];
    }
    const auto fp = sparsemax(zp).output, fm = sparsemax(zm).output;
    const auto jv = sparsemax_jvp(p, v);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double fd = (fp[i] - fm[i]) / (2 * h);
      EXPECT_LT(std::abs(fd - jv[i]) / std::max(1.0, std::abs(fd)), 1e-3);
    }
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(SparsemaxRows, RowsOnSimplexAndHandRow) {
  const Tensor m({2, 2}, std::vector<float>{1.5f, 0.2f, 0.0f, 0.0f});
  EXPECT_EQ(rows_of(sparsemax_rows(m)), (std::vector<double>{1, 0, 0.5, 0.5}));
  const Tensor r = sparsemax_rows(Tensor({5, 9}, std::vector<float>(45, 0.0f)));
  for (std::int64_t i = 0; i < 5; ++i) {
    double s = 0;
    for (std::int64_t j = 0; j < 9; ++j) s += r[i * 9 + j];
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(SparsemaxRows, ColumnPermutationPermutesOutput) {
  const Tensor m({1, 4}, std::vector<float>{0.3f, -0.1f, 0.25f, 0.9f});
  const Tensor pm({1, 4}, std::vector<float>{0.9f, 0.3f, 0.25f, -0.1f});
  const Tensor a = sparsemax_rows(m), b = sparsemax_rows(pm);
  EXPECT_EQ(b[0], a[3]);
  EXPECT_EQ(b[1], a[0]);
  EXPECT_EQ(b[2], a[2]);
  EXPECT_EQ(b[3], a[1]);
}

TEST(SoftmaxRows, HandCases) {
  EXPECT_EQ(rows_of(softmax_rows(Tensor({1, 2}))), (std::vector<double>{0.5, 0.5}));
  const Tensor r = softmax_rows(
      Tensor({1, 2}, std::vector<float>{0.0f, static_cast<float>(std::log(3.0))}));
  EXPECT_NEAR(r[0], 0.25, 1e-7);
  EXPECT_NEAR(r[1], 0.75, 1e-7);
}

TEST(SoftmaxRows, ShiftInvariant) {
  const Tensor m({1, 4}, std::vector<float>{0.5f, -1.25f, 2.0f, 0.0f});
  const Tensor shifted = add(m, Tensor({1, 4}, 8.0f));
  EXPECT_EQ(rows_of(softmax_rows(m)), rows_of(softmax_rows(shifted)));
  const Tensor wide = softmax_rows(Tensor({1, 3}, std::vector<float>{-20, 0, 20}));
  for (float v : wide.data()) {
    EXPECT_GT(v, 0.0f);
  }
}

TEST(SparsemaxRows, FaultHookCorruptsBackwardOnly) {
  auto grad = [] {
    Tape tape;
    const Tensor m = tape.watch(Tensor({1, 3}, std::vector<float>{0.1f, 0.3f, 0.2f}));
    const Tensor y = sparsemax_rows(m);
    tape.backward(sum(mul(y, Tensor({1, 3}, std::vector<float>{1, 2, 4}))));
    return rows_of(tape.grad(m));
  };
  const auto clean = grad();
  testing::inject_sparsemax_jvp_fault(true);
  const auto faulty = grad();
  testing::inject_sparsemax_jvp_fault(false);
  EXPECT_NE(clean, faulty);
  EXPECT_NEAR(clean[0] + clean[1] + clean[2], 0.0, 1e-6);
  EXPECT_EQ(clean, grad());
}

}  // namespace
}  // namespace gsa
