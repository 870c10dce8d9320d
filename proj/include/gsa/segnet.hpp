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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsa/attention.hpp"
#include "gsa/params.hpp"
#include "gsa/tensor.hpp"

namespace gsa {

enum class HeadKind {
  aspp,
  sa_aspp,
  sa_aspp_condense_only,
  sa_aspp_diffuse_only,
  gaf_aspp_softmax,
  gaf_aspp_sparsemax,
  gsa_aspp,
};

enum class DecoderKind { plain, sa_dec };

inline constexpr HeadKind kAllHeads[] = {
    HeadKind::aspp,          HeadKind::sa_aspp_condense_only, HeadKind::sa_aspp_diffuse_only,
    HeadKind::sa_aspp,       HeadKind::gaf_aspp_softmax,      HeadKind::gaf_aspp_sparsemax,
    HeadKind::gsa_aspp,
};

std::string_view to_string(HeadKind head);
std::string_view to_string(DecoderKind decoder);
std::optional<HeadKind> parse_head(std::string_view text);
std::optional<DecoderKind> parse_decoder(std::string_view text);

// True when the global branch is a GAF instead of GAP.
bool uses_gaf(HeadKind head);

struct ModelConfig {
  HeadKind head = HeadKind::gsa_aspp;
  DecoderKind decoder = DecoderKind::sa_dec;
  std::vector<int> dilations{6, 12, 18};
  std::int64_t head_channels = 64;
  std::int64_t decoder_channels = 64;
  std::int64_t low_level_channels = 48;
  // One stride-2 3x3 block per entry; the second block is tapped as the
  // stride-4 low-level feature.
  std::vector<std::int64_t> fxn_channels{16, 32, 48, 64};
  int num_classes = 4;
  int output_stride = 16;
  // 0 selects max(4, sum C_i / 4) for each selective-attention block.
  std::int64_t gamma = 0;
  // 0 selects max(4, C / 2) for the GAF query/key embedding.
  std::int64_t embed_channels = 0;
  std::uint64_t seed = 0;

  // ContractError describing the first violated invariant.
  void validate() const;
  // Number of ASPP branches: 1x1 + one per dilation + global.
  std::size_t num_branches() const { return dilations.size() + 2; }
  std::int64_t gamma_for(std::int64_t total_channels) const;
  std::int64_t gaf_embed_width() const;
};

std::vector<ParamSpec> model_param_specs(const ModelConfig& cfg);
ParamMap init_model(const ModelConfig& cfg);

// Intermediate values exposed for inspection and tests.
struct ForwardTrace {
  std::optional<GafResult> gaf;
  std::vector<Tensor> head_attentions;
  std::vector<Tensor> decoder_attentions;
  Tensor deep;
  Tensor low_level;
  Tensor head_out;
};

struct FxnOutput {
  Tensor deep;
  Tensor low_level;
};

FxnOutput toy_fxn(const Tensor& image, const ModelConfig& cfg, const ParamMap& params);
BranchSet aspp_branches(const Tensor& deep, const ModelConfig& cfg, const ParamMap& params,
                        ForwardTrace* trace = nullptr);
Tensor head_forward(const Tensor& deep, const ModelConfig& cfg, const ParamMap& params,
                    ForwardTrace* trace = nullptr);
// Low-level reduction, upsampling of the head output, (selective) fusion,
// two 3x3 convs, class logits, upsampling to (out_h, out_w).
Tensor decoder_forward(const Tensor& head_out, const Tensor& low_level, const ModelConfig& cfg,
                       const ParamMap& params, std::int64_t out_h, std::int64_t out_w,
                       ForwardTrace* trace = nullptr);
// (B, H, W, 3) image -> (B, H, W, num_classes) logits.
Tensor gsanet_forward(const Tensor& image, const ModelConfig& cfg, const ParamMap& params,
                      ForwardTrace* trace = nullptr);

// Parameter and multiply-accumulate accounting.
struct BlockCost {
  std::string name;
  std::int64_t params = 0;
  std::int64_t flops = 0;
};

struct CostReport {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::int64_t params = 0;
  // Multiply-accumulates of convolutions (nominal, every tap counted),
  // fully connected layers and attention matmuls, for one image.
  std::int64_t flops = 0;
  std::vector<BlockCost> blocks;
};

CostReport count_cost(const ModelConfig& cfg, std::int64_t height, std::int64_t width);
std::string format_cost_table(const CostReport& report);
std::string format_cost_kv(const CostReport& report);

}  // namespace gsa
