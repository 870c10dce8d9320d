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
#include <span>
#include <vector>

#include "gsa/tensor.hpp"

namespace gsa {

// n >= 2 feature maps sharing batch and spatial extents.
using BranchSet = std::vector<Tensor>;

struct FcParams {
  Tensor w;  // (din, dout)
  Tensor b;  // (dout)
};

// Selective attention. Condensation: concat -> GAP -> fc1 -> ReLU -> fc2
// gives a gamma-wide condensate. Diffusion: one FC head per branch, each
// followed by a sigmoid, gives that branch's channel attention.
struct SAParams {
  FcParams fc1;                   // (sum C_i, hidden)
  FcParams fc2;                   // (hidden, gamma)
  std::vector<FcParams> heads;    // heads[i]: (gamma, C_i)
};

// Ablation: condensation as above, then a single FC (gamma -> sum C_i)
// produces every branch's attention at once.
struct SACondenseOnlyParams {
  FcParams fc1;
  FcParams fc2;
  FcParams joint;  // (gamma, sum C_i)
};

// Ablation: independent squeeze-excitation per branch, no shared path.
struct SADiffuseOnlyParams {
  std::vector<FcParams> squeeze;  // (C_i, h_i)
  std::vector<FcParams> excite;   // (h_i, C_i)
};

// Condensate width when none is configured: max(4, sum C_i / 4).
std::int64_t default_gamma(std::int64_t total_channels);
// Bottleneck width of the diffuse-only squeeze: max(4, C / 4).
std::int64_t default_squeeze_width(std::int64_t channels);

void check_branches(const BranchSet& bs);

Tensor sa_condense(const BranchSet& bs, const SAParams& p);
std::vector<Tensor> sa_diffuse(const Tensor& condensate, const SAParams& p);
// Per-branch channel attentions, (B, C_i) each.
std::vector<Tensor> sa_attentions(const BranchSet& bs, const SAParams& p);
Tensor selective_attention(const BranchSet& bs, const SAParams& p);

std::vector<Tensor> sa_attentions_condense_only(const BranchSet& bs,
                                                const SACondenseOnlyParams& p);
Tensor selective_attention_condense_only(const BranchSet& bs, const SACondenseOnlyParams& p);

std::vector<Tensor> sa_attentions_diffuse_only(const BranchSet& bs,
                                               const SADiffuseOnlyParams& p);
Tensor selective_attention_diffuse_only(const BranchSet& bs, const SADiffuseOnlyParams& p);

// Scales each branch by its attention and concatenates the results.
Tensor apply_branch_attention(const BranchSet& bs, std::span<const Tensor> attentions);

enum class AttentionMode { softmax, sparsemax };

// Global attention feature. `qk` embeds the input to C_e channels and serves
// as both query and key; `value` maps the input back to C channels.
struct GafParams {
  Tensor qk_w;  // (1, 1, C, C_e)
  Tensor qk_b;  // (C_e)
  Tensor value_w;  // (1, 1, C, C)
  Tensor value_b;  // (C)
};

struct GafResult {
  Tensor output;      // (B, H, W, C) = x + attended
  Tensor raw;         // (B, N, N) scaled pairwise correlations, N = H * W
  Tensor normalized;  // (B, N, N) rows on the simplex
};

// Query/key width when none is configured: max(4, C / 2).
std::int64_t default_embed_channels(std::int64_t channels);

GafResult gaf(const Tensor& x, AttentionMode mode, const GafParams& p);

}  // namespace gsa
