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

#include "gsa/simd.hpp"

namespace gsa::simd {
namespace {

void axpy_scalar(std::size_t n, float a, const float* x, float* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

float dot_scalar(std::size_t n, const float* a, const float* b) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void mul_scalar(std::size_t n, const float* a, const float* b, float* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void add_scalar(std::size_t n, const float* a, const float* b, float* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void scale_scalar(std::size_t n, float a, float* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", axpy_scalar, dot_scalar, mul_scalar,
                                 add_scalar, scale_scalar};
  return table;
}

}  // namespace gsa::simd
