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

#include "gsa/params.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gsa {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  // FNV-1a over the label, folded into the seed, then one splitmix64 round.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ParamMap init_params(const std::vector<ParamSpec>& specs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamMap out;
  for (const auto& spec : specs) {
    std::vector<float> data(static_cast<std::size_t>(shape_numel(spec.shape)), 0.0f);
    if (spec.init != Init::zeros) {
      const double gain = spec.init == Init::he_normal ? 2.0 : 1.0;
      std::normal_distribution<double> dist(0.0, std::sqrt(gain / static_cast<double>(spec.fan_in)));
      for (auto& v : data) v = static_cast<float>(dist(rng));
    }
    if (!out.emplace(spec.name, Tensor(spec.shape, std::move(data))).second) {
      throw ContractError("duplicate parameter name '" + spec.name + "'");
    }
  }
  return out;
}

const Tensor& param(const ParamMap& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw ContractError("missing parameter tensor '" + name + "'");
  return it->second;
}

std::int64_t count_params(const ParamMap& params) {
  std::int64_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

void check_params(const ParamMap& params, const std::vector<ParamSpec>& specs) {
  for (const auto& spec : specs) {
    const Tensor& t = param(params, spec.name);
    if (t.shape() != spec.shape) {
      throw ContractError("parameter tensor '" + spec.name + "' has shape " +
                          shape_str(t.shape()) + ", expected " + shape_str(spec.shape));
    }
  }
  if (params.size() != specs.size()) {
    for (const auto& [name, t] : params) {
      const bool known = std::any_of(specs.begin(), specs.end(),
                                     [&](const ParamSpec& s) { return s.name == name; });
      if (!known) throw ContractError("unexpected parameter tensor '" + name + "'");
    }
  }
}

ParamMap watch_params(Tape& tape, const ParamMap& params) {
  ParamMap out;
  for (const auto& [name, t] : params) out.emplace(name, tape.watch(t));
  return out;
}

}  // namespace gsa
