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

#include "gsa/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsa/ops.hpp"
#include "gsa/sparsemax.hpp"

namespace gsa {

std::int64_t default_gamma(std::int64_t total_channels) {
  return std::max<std::int64_t>(4, total_channels / 4);
}

std::int64_t default_squeeze_width(std::int64_t channels) {
  return std::max<std::int64_t>(4, channels / 4);
}

std::int64_t default_embed_channels(std::int64_t channels) {
  return std::max<std::int64_t>(4, channels / 2);
}

void check_branches(const BranchSet& bs) {
  if (bs.size() < 2) {
    throw ContractError("selective attention needs at least 2 branches, got " +
                        std::to_string(bs.size()));
  }
  for (const auto& b : bs) {
    if (!b.defined() || b.rank() != 4) throw ContractError("branches must be rank-4 feature maps");
    if (b.dim(0) != bs[0].dim(0) || b.dim(1) != bs[0].dim(1) || b.dim(2) != bs[0].dim(2)) {
      throw ContractError("branch extents differ: " + shape_str(bs[0].shape()) + " vs " +
                          shape_str(b.shape()));
    }
  }
}

namespace {

Tensor fc(const Tensor& x, const FcParams& p) { return fully_connected(x, p.w, p.b); }

// concat -> GAP -> (B, sum C_i)
Tensor pooled_concat(const BranchSet& bs) {
  check_branches(bs);
  const Tensor pooled = global_avg_pool(concat_channels(std::span<const Tensor>(bs)));
  return reshape(pooled, {pooled.dim(0), pooled.dim(3)});
}

Tensor condense(const BranchSet& bs, const FcParams& fc1, const FcParams& fc2) {
  return fc(relu(fc(pooled_concat(bs), fc1)), fc2);
}

}  // namespace

Tensor sa_condense(const BranchSet& bs, const SAParams& p) { return condense(bs, p.fc1, p.fc2); }

std::vector<Tensor> sa_diffuse(const Tensor& condensate, const SAParams& p) {
  if (condensate.rank() != 2 || condensate.dim(1) != p.fc2.w.dim(1)) {
    throw ContractError("sa_diffuse: condensate shape " + shape_str(condensate.shape()) +
                        " does not match gamma " + std::to_string(p.fc2.w.dim(1)));
  }
  std::vector<Tensor> out;
  out.reserve(p.heads.size());
  for (const auto& head : p.heads) out.push_back(sigmoid(fc(condensate, head)));
  return out;
}

std::vector<Tensor> sa_attentions(const BranchSet& bs, const SAParams& p) {
  if (p.heads.size() != bs.size()) {
    throw ContractError("selective attention has " + std::to_string(p.heads.size()) +
                        " diffusion heads for " + std::to_string(bs.size()) + " branches");
  }
  return sa_diffuse(sa_condense(bs, p), p);
}

Tensor apply_branch_attention(const BranchSet& bs, std::span<const Tensor> attentions) {
  std::vector<Tensor> scaled;
  scaled.reserve(bs.size());
  for (std::size_t i = 0; i < bs.size(); ++i) scaled.push_back(channel_scale(bs[i], attentions[i]));
  return concat_channels(std::span<const Tensor>(scaled));
}

Tensor selective_attention(const BranchSet& bs, const SAParams& p) {
  const auto att = sa_attentions(bs, p);
  return apply_branch_attention(bs, att);
}

std::vector<Tensor> sa_attentions_condense_only(const BranchSet& bs,
                                                const SACondenseOnlyParams& p) {
  const Tensor joint = sigmoid(fc(condense(bs, p.fc1, p.fc2), p.joint));
  std::vector<Tensor> out;
  std::int64_t offset = 0;
  for (const auto& b : bs) {
    out.push_back(slice_channels(joint, offset, b.dim(3)));
    offset += b.dim(3);
  }
  if (offset != joint.dim(1)) {
    throw ContractError("condense-only attention width " + std::to_string(joint.dim(1)) +
                        " does not match branch channels " + std::to_string(offset));
  }
  return out;
}

Tensor selective_attention_condense_only(const BranchSet& bs, const SACondenseOnlyParams& p) {
  const auto att = sa_attentions_condense_only(bs, p);
  return apply_branch_attention(bs, att);
}

std::vector<Tensor> sa_attentions_diffuse_only(const BranchSet& bs,
                                               const SADiffuseOnlyParams& p) {
  check_branches(bs);
  if (p.squeeze.size() != bs.size() || p.excite.size() != bs.size()) {
    throw ContractError("diffuse-only attention needs one squeeze/excite pair per branch");
  }
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const Tensor pooled = global_avg_pool(bs[i]);
    const Tensor v = reshape(pooled, {pooled.dim(0), pooled.dim(3)});
    out.push_back(sigmoid(fc(relu(fc(v, p.squeeze[i])), p.excite[i])));
  }
  return out;
}

Tensor selective_attention_diffuse_only(const BranchSet& bs, const SADiffuseOnlyParams& p) {
  const auto att = sa_attentions_diffuse_only(bs, p);
  return apply_branch_attention(bs, att);
}

GafResult gaf(const Tensor& x, AttentionMode mode, const GafParams& p) {
  if (!x.defined() || x.rank() != 4) throw ContractError("gaf: expected a rank-4 feature map");
  const std::int64_t B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const std::int64_t N = H * W;
  if (N == 0) throw ContractError("gaf: empty spatial extent");
  const std::int64_t Ce = p.qk_w.dim(3);

  ConvSpec qk_spec{1, 1, 1, 1, C, Ce};
  ConvSpec v_spec{1, 1, 1, 1, C, p.value_w.dim(3)};
  if (p.value_w.dim(3) != C) {
    throw ContractError("gaf: value embedding must map back to " + std::to_string(C) +
                        " channels, got weight " + shape_str(p.value_w.shape()));
  }
  const Tensor emb = reshape(conv2d(x, p.qk_w, p.qk_b, qk_spec), {B, N, Ce});
  const Tensor raw =
      scale(matmul(emb, transpose(emb)), 1.0f / std::sqrt(static_cast<float>(Ce)));
  const Tensor normalized =
      mode == AttentionMode::softmax ? softmax_rows(raw) : sparsemax_rows(raw);
  const Tensor value = reshape(conv2d(x, p.value_w, p.value_b, v_spec), {B, N, C});
  const Tensor attended = reshape(matmul(normalized, value), {B, H, W, C});
  return {add(x, attended), raw, normalized};
}

}  // namespace gsa
