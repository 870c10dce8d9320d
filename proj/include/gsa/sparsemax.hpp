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

#include <cstddef>
#include <span>
#include <vector>

#include "gsa/tensor.hpp"

namespace gsa {

// Euclidean projection of a score vector onto the probability simplex.
//
// With z sorted descending as z_(1) >= ... >= z_(K), the support size is
// f = max{k : 1 + k z_(k) > sum_{j<=k} z_(j)}, the threshold is
// tau = (sum_{j<=f} z_(j) - 1) / f, and p_i = max(0, z_i - tau).
struct SimplexProjection {
  std::vector<double> input;
  std::vector<double> output;
  double tau = 0.0;
  // Number of sorted entries kept by the threshold rule.
  std::size_t support_size = 0;
  // Indices with p_i > 0, ascending.
  std::vector<std::size_t> support;
};

// Throws ContractError on an empty or non-finite input.
//
// The scores are shifted by their maximum before sorting, so adding a
// constant to every entry leaves the result bit-identical whenever the
// shifted values are themselves exact. Ties in the sort break by index.
SimplexProjection sparsemax(std::span<const double> z);

// Jacobian of sparsemax at proj.input applied to v:
// out_i = v_i - mean_{j in S} v_j for i in S, 0 elsewhere. The Jacobian is
// symmetric, so this is also the vector-Jacobian product.
std::vector<double> sparsemax_jvp(const SimplexProjection& proj, std::span<const double> v);

// Row-wise sparsemax / softmax over the last axis of a tensor of any rank.
// Rows are computed in double and rounded once to float.
Tensor sparsemax_rows(const Tensor& m);
Tensor softmax_rows(const Tensor& m);

namespace testing {
// Corrupts the backward of sparsemax_rows (drops the support-mean term).
// Exists only so the gradient checker can prove it detects a wrong JVP.
void inject_sparsemax_jvp_fault(bool enabled);
bool sparsemax_jvp_fault_injected();
}  // namespace testing

}  // namespace gsa
