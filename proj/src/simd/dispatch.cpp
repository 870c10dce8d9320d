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

#include <cstdlib>
#include <string>

#include "gsa/simd.hpp"

namespace gsa::simd {

#if !defined(GSA_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !defined(GSA_HAVE_NEON)
const KernelTable* neon_kernels() { return nullptr; }
#endif

std::vector<const KernelTable*> available_backends() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
  if (const auto* t = avx2_kernels()) out.push_back(t);
  if (const auto* t = neon_kernels()) out.push_back(t);
  return out;
}

namespace {

const KernelTable* find_backend(std::string_view name) {
  for (const auto* t : available_backends()) {
    if (name == t->name) return t;
  }
  return nullptr;
}

const KernelTable*& current() {
  static const KernelTable* table = [] {
    if (const char* env = std::getenv("GSA_SIMD")) {
      if (const auto* t = find_backend(env)) return t;
    }
    return available_backends().back();
  }();
  return table;
}

}  // namespace

const KernelTable& active() { return *current(); }

bool select_backend(std::string_view name) {
  const auto* t = find_backend(name);
  if (t == nullptr) return false;
  current() = t;
  return true;
}

}  // namespace gsa::simd
