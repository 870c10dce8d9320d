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

#include "gsa/segnet.hpp"

#include <bit>
#include <string>

#include "gsa/ops.hpp"

namespace gsa {

std::string_view to_string(HeadKind head) {
  switch (head) {
    case HeadKind::aspp: return "aspp";
    case HeadKind::sa_aspp: return "sa_aspp";
    case HeadKind::sa_aspp_condense_only: return "sa_aspp_condense_only";
    case HeadKind::sa_aspp_diffuse_only: return "sa_aspp_diffuse_only";
    case HeadKind::gaf_aspp_softmax: return "gaf_aspp_softmax";
    case HeadKind::gaf_aspp_sparsemax: return "gaf_aspp_sparsemax";
    case HeadKind::gsa_aspp: return "gsa_aspp";
  }
  return "?";
}

std::string_view to_string(DecoderKind decoder) {
  return decoder == DecoderKind::plain ? "plain" : "sa_dec";
}

std::optional<HeadKind> parse_head(std::string_view text) {
  for (HeadKind h : kAllHeads) {
    if (to_string(h) == text) return h;
  }
  return std::nullopt;
}

std::optional<DecoderKind> parse_decoder(std::string_view text) {
  if (text == "plain") return DecoderKind::plain;
  if (text == "sa_dec") return DecoderKind::sa_dec;
  return std::nullopt;
}

bool uses_gaf(HeadKind head) {
  return head == HeadKind::gaf_aspp_softmax || head == HeadKind::gaf_aspp_sparsemax ||
         head == HeadKind::gsa_aspp;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ContractError("model config: " + msg); };
  if (dilations.empty()) fail("dilations must be nonempty");
  for (std::size_t i = 0; i < dilations.size(); ++i) {
    if (dilations[i] <= 0) fail("dilations must be positive");
    if (i > 0 && dilations[i] <= dilations[i - 1]) fail("dilations must be strictly increasing");
  }
  if (head_channels <= 0 || decoder_channels <= 0 || low_level_channels <= 0) {
    fail("channel widths must be positive");
  }
  if (num_classes < 2) fail("num_classes must be at least 2");
  if (output_stride < 8 || !std::has_single_bit(static_cast<unsigned>(output_stride))) {
    fail("output_stride must be a power of two >= 8, got " + std::to_string(output_stride));
  }
  const auto blocks = static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(output_stride)));
  if (fxn_channels.size() != blocks) {
    fail("output_stride " + std::to_string(output_stride) + " needs " + std::to_string(blocks) +
         " fxn_channels entries, got " + std::to_string(fxn_channels.size()));
  }
  for (auto c : fxn_channels) {
    if (c <= 0) fail("fxn_channels must be positive");
  }
  if (gamma < 0 || embed_channels < 0) fail("gamma and embed_channels must be >= 0");
}

std::int64_t ModelConfig::gamma_for(std::int64_t total_channels) const {
  return gamma > 0 ? gamma : default_gamma(total_channels);
}

std::int64_t ModelConfig::gaf_embed_width() const {
  return embed_channels > 0 ? embed_channels : default_embed_channels(fxn_channels.back());
}

namespace {

void conv_spec(std::vector<ParamSpec>& out, const std::string& name, int k, std::int64_t cin,
               std::int64_t cout, Init init = Init::he_normal) {
  out.push_back({name + ".w", {k, k, cin, cout}, init, k * k * cin});
  out.push_back({name + ".b", {cout}, Init::zeros, 1});
}

void fc_spec(std::vector<ParamSpec>& out, const std::string& name, std::int64_t din,
             std::int64_t dout, Init init) {
  out.push_back({name + ".w", {din, dout}, init, din});
  out.push_back({name + ".b", {dout}, Init::zeros, 1});
}

void sa_specs(std::vector<ParamSpec>& out, const std::string& prefix,
              const std::vector<std::int64_t>& widths, std::int64_t gamma) {
  std::int64_t total = 0;
  for (auto w : widths) total += w;
  fc_spec(out, prefix + ".fc1", total, gamma, Init::he_normal);
  fc_spec(out, prefix + ".fc2", gamma, gamma, Init::lecun_normal);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    fc_spec(out, prefix + ".head" + std::to_string(i), gamma, widths[i], Init::lecun_normal);
  }
}

FcParams fc_params(const ParamMap& p, const std::string& name) {
  return {param(p, name + ".w"), param(p, name + ".b")};
}

SAParams sa_params(const ParamMap& p, const std::string& prefix, std::size_t n) {
  SAParams out{fc_params(p, prefix + ".fc1"), fc_params(p, prefix + ".fc2"), {}};
  for (std::size_t i = 0; i < n; ++i) {
    out.heads.push_back(fc_params(p, prefix + ".head" + std::to_string(i)));
  }
  return out;
}

Tensor conv(const Tensor& x, const ParamMap& p, const std::string& name, int dilation = 1,
            int stride = 1) {
  const Tensor& w = param(p, name + ".w");
  ConvSpec spec{static_cast<int>(w.dim(0)), static_cast<int>(w.dim(1)), dilation, stride,
                w.dim(2), w.dim(3)};
  return conv2d(x, w, param(p, name + ".b"), spec);
}

}  // namespace

std::vector<ParamSpec> model_param_specs(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<ParamSpec> out;
  std::int64_t cin = 3;
  for (std::size_t i = 0; i < cfg.fxn_channels.size(); ++i) {
    conv_spec(out, "fxn.conv" + std::to_string(i), 3, cin, cfg.fxn_channels[i]);
    cin = cfg.fxn_channels[i];
  }
  const std::int64_t deep_c = cfg.fxn_channels.back();
  const std::int64_t low_c = cfg.fxn_channels[1];
  const std::int64_t ch = cfg.head_channels;
  const std::size_t n = cfg.num_branches();

  conv_spec(out, "aspp.b0", 1, deep_c, ch);
  for (std::size_t i = 0; i < cfg.dilations.size(); ++i) {
    conv_spec(out, "aspp.b" + std::to_string(i + 1), 3, deep_c, ch);
  }
  conv_spec(out, "aspp.global", 1, deep_c, ch);
  if (uses_gaf(cfg.head)) {
    conv_spec(out, "gaf.qk", 1, deep_c, cfg.gaf_embed_width(), Init::lecun_normal);
    conv_spec(out, "gaf.value", 1, deep_c, deep_c, Init::lecun_normal);
  }

  const std::vector<std::int64_t> widths(n, ch);
  const std::int64_t gamma = cfg.gamma_for(static_cast<std::int64_t>(n) * ch);
  switch (cfg.head) {
    case HeadKind::sa_aspp:
    case HeadKind::gsa_aspp:
      sa_specs(out, "head.sa", widths, gamma);
      break;
    case HeadKind::sa_aspp_condense_only:
      fc_spec(out, "head.sa.fc1", static_cast<std::int64_t>(n) * ch, gamma, Init::he_normal);
      fc_spec(out, "head.sa.fc2", gamma, gamma, Init::lecun_normal);
      fc_spec(out, "head.sa.joint", gamma, static_cast<std::int64_t>(n) * ch, Init::lecun_normal);
      break;
    case HeadKind::sa_aspp_diffuse_only:
      for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t h = default_squeeze_width(ch);
        fc_spec(out, "head.sa.squeeze" + std::to_string(i), ch, h, Init::he_normal);
        fc_spec(out, "head.sa.excite" + std::to_string(i), h, ch, Init::lecun_normal);
      }
      break;
    default:
      break;
  }
  conv_spec(out, "head.proj", 1, static_cast<std::int64_t>(n) * ch, ch);

  const std::int64_t lc = cfg.low_level_channels;
  conv_spec(out, "dec.low", 1, low_c, lc);
  if (cfg.decoder == DecoderKind::sa_dec) {
    sa_specs(out, "dec.sa", {lc, ch}, cfg.gamma_for(lc + ch));
  }
  conv_spec(out, "dec.conv1", 3, lc + ch, cfg.decoder_channels);
  conv_spec(out, "dec.conv2", 3, cfg.decoder_channels, cfg.decoder_channels);
  conv_spec(out, "dec.cls", 1, cfg.decoder_channels, cfg.num_classes, Init::lecun_normal);
  return out;
}

ParamMap init_model(const ModelConfig& cfg) {
  return init_params(model_param_specs(cfg), derive_seed(cfg.seed, "init"));
}

FxnOutput toy_fxn(const Tensor& image, const ModelConfig& cfg, const ParamMap& params) {
  if (!image.defined() || image.rank() != 4 || image.dim(3) != 3) {
    throw ContractError("toy_fxn: expected a (B, H, W, 3) image, got " +
                        shape_str(image.shape()));
  }
  if (image.dim(1) % cfg.output_stride != 0 || image.dim(2) % cfg.output_stride != 0) {
    throw ContractError("toy_fxn: image extents " + std::to_string(image.dim(1)) + "x" +
                        std::to_string(image.dim(2)) + " are not divisible by output stride " +
                        std::to_string(cfg.output_stride));
  }
  FxnOutput out;
  Tensor x = image;
  for (std::size_t i = 0; i < cfg.fxn_channels.size(); ++i) {
    x = relu(conv(x, params, "fxn.conv" + std::to_string(i), 1, 2));
    if (i == 1) out.low_level = x;
  }
  out.deep = x;
  return out;
}

BranchSet aspp_branches(const Tensor& deep, const ModelConfig& cfg, const ParamMap& params,
                        ForwardTrace* trace) {
  BranchSet branches;
  branches.push_back(relu(conv(deep, params, "aspp.b0")));
  for (std::size_t i = 0; i < cfg.dilations.size(); ++i) {
    branches.push_back(relu(conv(deep, params, "aspp.b" + std::to_string(i + 1), cfg.dilations[i])));
  }
  if (uses_gaf(cfg.head)) {
    const GafParams gp{param(params, "gaf.qk.w"), param(params, "gaf.qk.b"),
                       param(params, "gaf.value.w"), param(params, "gaf.value.b")};
    const AttentionMode mode = cfg.head == HeadKind::gaf_aspp_softmax ? AttentionMode::softmax
                                                                      : AttentionMode::sparsemax;
    GafResult g = gaf(deep, mode, gp);
    branches.push_back(relu(conv(g.output, params, "aspp.global")));
    if (trace) trace->gaf = std::move(g);
  } else {
    const Tensor pooled = relu(conv(global_avg_pool(deep), params, "aspp.global"));
    branches.push_back(broadcast_spatial(pooled, deep.dim(1), deep.dim(2)));
  }
  return branches;
}

Tensor head_forward(const Tensor& deep, const ModelConfig& cfg, const ParamMap& params,
                    ForwardTrace* trace) {
  const BranchSet bs = aspp_branches(deep, cfg, params, trace);
  std::vector<Tensor> att;
  switch (cfg.head) {
    case HeadKind::sa_aspp:
    case HeadKind::gsa_aspp:
      att = sa_attentions(bs, sa_params(params, "head.sa", bs.size()));
      break;
    case HeadKind::sa_aspp_condense_only:
      att = sa_attentions_condense_only(
          bs, {fc_params(params, "head.sa.fc1"), fc_params(params, "head.sa.fc2"),
               fc_params(params, "head.sa.joint")});
      break;
    case HeadKind::sa_aspp_diffuse_only: {
      SADiffuseOnlyParams p;
      for (std::size_t i = 0; i < bs.size(); ++i) {
        p.squeeze.push_back(fc_params(params, "head.sa.squeeze" + std::to_string(i)));
        p.excite.push_back(fc_params(params, "head.sa.excite" + std::to_string(i)));
      }
      att = sa_attentions_diffuse_only(bs, p);
      break;
    }
    default:
      break;
  }
  const Tensor fused = att.empty() ? concat_channels(std::span<const Tensor>(bs))
                                   : apply_branch_attention(bs, att);
  if (trace) trace->head_attentions = att;
  return relu(conv(fused, params, "head.proj"));
}

Tensor decoder_forward(const Tensor& head_out, const Tensor& low_level, const ModelConfig& cfg,
                       const ParamMap& params, std::int64_t out_h, std::int64_t out_w,
                       ForwardTrace* trace) {
  const Tensor low = relu(conv(low_level, params, "dec.low"));
  const Tensor up = resize_bilinear(head_out, low.dim(1), low.dim(2));
  const BranchSet bs{low, up};
  Tensor fused;
  if (cfg.decoder == DecoderKind::sa_dec) {
    const auto att = sa_attentions(bs, sa_params(params, "dec.sa", 2));
    if (trace) trace->decoder_attentions = att;
    fused = apply_branch_attention(bs, att);
  } else {
    fused = concat_channels(std::span<const Tensor>(bs));
  }
  Tensor x = relu(conv(fused, params, "dec.conv1"));
  x = relu(conv(x, params, "dec.conv2"));
  x = conv(x, params, "dec.cls");
  return resize_bilinear(x, out_h, out_w);
}

Tensor gsanet_forward(const Tensor& image, const ModelConfig& cfg, const ParamMap& params,
                      ForwardTrace* trace) {
  const FxnOutput f = toy_fxn(image, cfg, params);
  const Tensor head = head_forward(f.deep, cfg, params, trace);
  if (trace) {
    trace->deep = f.deep;
    trace->low_level = f.low_level;
    trace->head_out = head;
  }
  return decoder_forward(head, f.low_level, cfg, params, image.dim(1), image.dim(2), trace);
}

}  // namespace gsa
