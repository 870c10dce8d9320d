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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gsa/tensor.hpp"

namespace gsa {

struct GradCheckOptions {
  int probes = 64;
  double eps = 1e-3;
  double tolerance = 1e-3;
  // Denominator floor of the relative error, so that near-zero gradients are
  // compared absolutely.
  double floor = 1.0;
  // A probe whose one-sided slopes disagree by more than this (relative) is
  // straddling a kink (ReLU, sparsemax support change) and is redrawn.
  double kink_threshold = 0.05;
  std::uint64_t seed = 1;
};

struct GradCheckResult {
  std::string name;
  double worst_rel_error = 0.0;
  int probes = 0;
  int skipped_kinks = 0;
  bool passed = false;
};

using GradFn = std::function<Tensor(std::span<const Tensor>)>;

// Compares reverse-mode gradients of <R, fn(inputs)> (R a fixed random
// projection) against central finite differences at randomly drawn input
// coordinates. Only inputs with `probe_mask[i]` set are probed (all when the
// mask is empty).
GradCheckResult check_gradients(const std::string& name, const GradFn& fn,
                                const std::vector<Tensor>& inputs,
                                const GradCheckOptions& options = {},
                                const std::vector<bool>& probe_mask = {});

// U[-1, 1] tensor.
Tensor random_uniform(const Shape& shape, std::uint64_t seed, float lo = -1.0f, float hi = 1.0f);

// Built-in suites: one entry per differentiable op and block. `filter` keeps
// suites whose name contains it (empty keeps all).
std::vector<GradCheckResult> run_gradcheck_suites(const std::string& filter,
                                                  const GradCheckOptions& options = {});
std::vector<std::string> gradcheck_suite_names();

}  // namespace gsa
