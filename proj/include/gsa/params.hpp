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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gsa/tensor.hpp"

namespace gsa {

// Named parameter tensors, ordered by name.
using ParamMap = std::map<std::string, Tensor>;

enum class Init {
  he_normal,      // N(0, 2 / fan_in), for layers followed by ReLU
  lecun_normal,   // N(0, 1 / fan_in)
  zeros,
};

struct ParamSpec {
  std::string name;
  Shape shape;
  Init init = Init::zeros;
  std::int64_t fan_in = 1;
};

// Stream seed for a named purpose ("init", "augment", "dataset", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

// Draws every tensor in spec order from one stream seeded by `seed`.
ParamMap init_params(const std::vector<ParamSpec>& specs, std::uint64_t seed);

// Looks up `name`; ContractError naming the tensor if missing.
const Tensor& param(const ParamMap& params, const std::string& name);

std::int64_t count_params(const ParamMap& params);

// Every spec'd name must be present with the spec'd shape, and nothing else.
void check_params(const ParamMap& params, const std::vector<ParamSpec>& specs);

// Attaches every parameter to `tape` as a leaf.
ParamMap watch_params(Tape& tape, const ParamMap& params);

}  // namespace gsa
