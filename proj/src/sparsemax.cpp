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

#include "gsa/sparsemax.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

namespace gsa {
namespace {

std::atomic<bool> g_jvp_fault{false};

}  // namespace

namespace testing {
void inject_sparsemax_jvp_fault(bool enabled) { g_jvp_fault = enabled; }
bool sparsemax_jvp_fault_injected() { return g_jvp_fault; }
}  // namespace testing

SimplexProjection sparsemax(std::span<const double> z) {
  if (z.empty()) throw ContractError("sparsemax: empty input");
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i])) {
      throw ContractError("sparsemax: non-finite entry at index " + std::to_string(i));
    }
  }
  const std::size_t K = z.size();
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> shifted(K);
  for (std::size_t i = 0; i < K; ++i) shifted[i] = z[i] - zmax;

  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return shifted[a] > shifted[b]; });

  // Strict inequality: a boundary tie is left out of the support.
  double partial = 0.0;
  double kept_sum = 0.0;
  std::size_t f = 0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double zk = shifted[order[k - 1]];
    partial += zk;
    if (1.0 + static_cast<double>(k) * zk > partial) {
      f = k;
      kept_sum = partial;
    }
  }
  const double tau_shifted = (kept_sum - 1.0) / static_cast<double>(f);

  SimplexProjection proj;
  proj.input.assign(z.begin(), z.end());
  proj.output.resize(K);
  proj.tau = tau_shifted + zmax;
  proj.support_size = f;
  for (std::size_t i = 0; i < K; ++i) {
    proj.output[i] = std::max(0.0, shifted[i] - tau_shifted);
    if (proj.output[i] > 0.0) proj.support.push_back(i);
  }
  return proj;
}

std::vector<double> sparsemax_jvp(const SimplexProjection& proj, std::span<const double> v) {
  if (v.size() != proj.output.size()) {
    throw ContractError("sparsemax_jvp: vector length " + std::to_string(v.size()) +
                        " does not match projection length " +
                        std::to_string(proj.output.size()));
  }
  std::vector<double> out(v.size(), 0.0);
  if (proj.support.empty()) return out;
  double s = 0.0;
  for (auto i : proj.support) s += v[i];
  const double mean = s / static_cast<double>(proj.support.size());
  for (auto i : proj.support) out[i] = v[i] - mean;
  return out;
}

namespace {

void require_rows(const Tensor& m, const char* op) {
  if (!m.defined() || m.rank() < 1) {
    throw ContractError(std::string(op) + ": expected a tensor of rank >= 1");
  }
  for (float v : m.data()) {
    if (!std::isfinite(v)) throw ContractError(std::string(op) + ": non-finite entry");
  }
}

}  // namespace

Tensor sparsemax_rows(const Tensor& m) {
  require_rows(m, "sparsemax_rows");
  const auto K = static_cast<std::size_t>(m.dim(-1));
  const std::size_t rows = static_cast<std::size_t>(m.numel()) / K;
  std::vector<float> out(rows * K);
  // Support per row, as a mask, for the backward pass.
  std::vector<std::uint8_t> mask(rows * K, 0);
  std::vector<double> z(K);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < K; ++j) z[j] = m.data()[r * K + j];
    const SimplexProjection p = sparsemax(z);
    for (std::size_t j = 0; j < K; ++j) out[r * K + j] = static_cast<float>(p.output[j]);
    for (auto j : p.support) mask[r * K + j] = 1;
  }
  Tensor result(m.shape(), std::move(out));
  return taped("sparsemax_rows", {m}, result,
               [mask = std::move(mask), rows, K](std::span<const float> g,
                                                 std::span<std::vector<float>* const> s) {
                 const bool fault = testing::sparsemax_jvp_fault_injected();
                 for (std::size_t r = 0; r < rows; ++r) {
                   double acc = 0.0;
                   std::size_t count = 0;
                   for (std::size_t j = 0; j < K; ++j) {
                     if (mask[r * K + j]) {
                       acc += g[r * K + j];
                       ++count;
                     }
                   }
                   const double mu = (count == 0 || fault) ? 0.0 : acc / static_cast<double>(count);
                   for (std::size_t j = 0; j < K; ++j) {
                     if (mask[r * K + j]) {
                       (*s[0])[r * K + j] += static_cast<float>(g[r * K + j] - mu);
                     }
                   }
                 }
               });
}

Tensor softmax_rows(const Tensor& m) {
  require_rows(m, "softmax_rows");
  const auto K = static_cast<std::size_t>(m.dim(-1));
  const std::size_t rows = static_cast<std::size_t>(m.numel()) / K;
  std::vector<float> out(rows * K);
  std::vector<double> e(K);
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = m.data().data() + r * K;
    const double mx = *std::max_element(row, row + K);
    double total = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      e[j] = std::exp(static_cast<double>(row[j]) - mx);
      total += e[j];
    }
    for (std::size_t j = 0; j < K; ++j) out[r * K + j] = static_cast<float>(e[j] / total);
  }
  Tensor result(m.shape(), std::move(out));
  return taped("softmax_rows", {m}, result,
               [result, rows, K](std::span<const float> g, std::span<std::vector<float>* const> s) {
                 const auto p = result.data();
                 for (std::size_t r = 0; r < rows; ++r) {
                   double inner = 0.0;
                   for (std::size_t j = 0; j < K; ++j) inner += double{g[r * K + j]} * p[r * K + j];
                   for (std::size_t j = 0; j < K; ++j) {
                     (*s[0])[r * K + j] +=
                         static_cast<float>(p[r * K + j] * (g[r * K + j] - inner));
                   }
                 }
               });
}

}  // namespace gsa
