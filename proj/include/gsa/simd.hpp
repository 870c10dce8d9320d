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
#include <string_view>
#include <vector>

namespace gsa::simd {

// Inner-loop kernels used by convolution, matmul and the elementwise ops.
// Every backend implements the same table; `scalar` is the reference and the
// vector backends are tested against it.
struct KernelTable {
  const char* name;
  // y[i] += a * x[i]
  void (*axpy)(std::size_t n, float a, const float* x, float* y);
  // sum_i a[i] * b[i]
  float (*dot)(std::size_t n, const float* a, const float* b);
  // out[i] = a[i] * b[i]
  void (*mul)(std::size_t n, const float* a, const float* b, float* out);
  // out[i] = a[i] + b[i]
  void (*add)(std::size_t n, const float* a, const float* b, float* out);
  // y[i] *= a
  void (*scale)(std::size_t n, float a, float* y);
};

const KernelTable& scalar_kernels();

// nullptr when the backend was not compiled in or the CPU lacks the features.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Every backend usable on this machine, scalar first.
std::vector<const KernelTable*> available_backends();

// Backend selected at startup: the widest available, unless the GSA_SIMD
// environment variable names one of "scalar", "avx2", "neon".
const KernelTable& active();

// Overrides the selection. Returns false if `name` is not available.
bool select_backend(std::string_view name);

inline void axpy(float a, std::span<const float> x, std::span<float> y) {
  active().axpy(x.size(), a, x.data(), y.data());
}

inline float dot(std::span<const float> a, std::span<const float> b) {
  return active().dot(a.size(), a.data(), b.data());
}

}  // namespace gsa::simd
