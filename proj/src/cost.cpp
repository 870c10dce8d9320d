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

#include <cstdio>
#include <map>
#include <sstream>

#include "gsa/segnet.hpp"

namespace gsa {
namespace {

// Ordered so that longer prefixes are tested first.
constexpr std::pair<const char*, const char*> kBlockPrefixes[] = {
    {"fxn.", "fxn"},           {"aspp.", "aspp"},         {"gaf.", "gaf"},
    {"head.sa.", "head_sa"},   {"head.proj.", "head_proj"}, {"dec.sa.", "decoder_sa"},
    {"dec.", "decoder"},
};

std::string block_of(const std::string& param_name) {
  for (const auto& [prefix, block] : kBlockPrefixes) {
    if (param_name.rfind(prefix, 0) == 0) return block;
  }
  return "other";
}

std::int64_t sa_fc_flops(std::int64_t total, std::int64_t gamma) {
  return total * gamma + gamma * gamma + gamma * total;
}

}  // namespace

CostReport count_cost(const ModelConfig& cfg, std::int64_t height, std::int64_t width) {
  cfg.validate();
  if (height <= 0 || width <= 0 || height % cfg.output_stride != 0 ||
      width % cfg.output_stride != 0) {
    throw ContractError("count_cost: resolution " + std::to_string(height) + "x" +
                        std::to_string(width) + " is not divisible by output stride " +
                        std::to_string(cfg.output_stride));
  }
  std::map<std::string, BlockCost> blocks;
  for (const auto& [prefix, block] : kBlockPrefixes) blocks[block].name = block;
  for (const auto& spec : model_param_specs(cfg)) {
    blocks[block_of(spec.name)].params += shape_numel(spec.shape);
  }

  const std::int64_t C = cfg.fxn_channels.back();
  const std::int64_t ch = cfg.head_channels;
  const auto n = static_cast<std::int64_t>(cfg.num_branches());
  const std::int64_t N = (height / cfg.output_stride) * (width / cfg.output_stride);

  std::int64_t h = height, w = width, cin = 3;
  std::int64_t low_pixels = 0;
  for (std::size_t i = 0; i < cfg.fxn_channels.size(); ++i) {
    h = (h + 1) / 2;
    w = (w + 1) / 2;
    blocks["fxn"].flops += h * w * 9 * cin * cfg.fxn_channels[i];
    cin = cfg.fxn_channels[i];
    if (i == 1) low_pixels = h * w;
  }

  auto& aspp = blocks["aspp"].flops;
  aspp += N * C * ch;
  aspp += static_cast<std::int64_t>(cfg.dilations.size()) * N * 9 * C * ch;
  aspp += uses_gaf(cfg.head) ? N * C * ch : C * ch;
  if (uses_gaf(cfg.head)) {
    const std::int64_t ce = cfg.gaf_embed_width();
    blocks["gaf"].flops = N * C * ce + N * C * C + N * N * ce + N * N * C;
  }

  const std::int64_t gamma = cfg.gamma_for(n * ch);
  switch (cfg.head) {
    case HeadKind::sa_aspp:
    case HeadKind::gsa_aspp:
    case HeadKind::sa_aspp_condense_only:
      blocks["head_sa"].flops = sa_fc_flops(n * ch, gamma);
      break;
    case HeadKind::sa_aspp_diffuse_only:
      blocks["head_sa"].flops = n * 2 * ch * default_squeeze_width(ch);
      break;
    default:
      break;
  }
  blocks["head_proj"].flops = N * n * ch * ch;

  const std::int64_t lc = cfg.low_level_channels;
  const std::int64_t dc = cfg.decoder_channels;
  if (cfg.decoder == DecoderKind::sa_dec) {
    blocks["decoder_sa"].flops = sa_fc_flops(lc + ch, cfg.gamma_for(lc + ch));
  }
  blocks["decoder"].flops = low_pixels * (cfg.fxn_channels[1] * lc + 9 * (lc + ch) * dc +
                                          9 * dc * dc + dc * cfg.num_classes);

  CostReport report;
  report.height = height;
  report.width = width;
  for (const auto& [prefix, name] : kBlockPrefixes) {
    const BlockCost& b = blocks[name];
    if (b.params == 0 && b.flops == 0) continue;
    report.blocks.push_back(b);
    report.params += b.params;
    report.flops += b.flops;
  }
  return report;
}

std::string format_cost_table(const CostReport& report) {
  std::ostringstream os;
  os << "resolution " << report.height << "x" << report.width << "\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-12s %14s %18s\n", "block", "params", "flops(MAC)");
  os << line;
  for (const auto& b : report.blocks) {
    std::snprintf(line, sizeof line, "%-12s %14lld %18lld\n", b.name.c_str(),
                  static_cast<long long>(b.params), static_cast<long long>(b.flops));
    os << line;
  }
  std::snprintf(line, sizeof line, "%-12s %14lld %18lld\n", "total",
                static_cast<long long>(report.params), static_cast<long long>(report.flops));
  os << line;
  std::snprintf(line, sizeof line, "params %.4f M, flops %.4f B\n",
                static_cast<double>(report.params) / 1e6, static_cast<double>(report.flops) / 1e9);
  os << line;
  return os.str();
}

std::string format_cost_kv(const CostReport& report) {
  std::ostringstream os;
  os << "height=" << report.height << "\n";
  os << "width=" << report.width << "\n";
  for (const auto& b : report.blocks) {
    os << "block." << b.name << ".params=" << b.params << "\n";
    os << "block." << b.name << ".flops=" << b.flops << "\n";
  }
  os << "total.params=" << report.params << "\n";
  os << "total.flops=" << report.flops << "\n";
  return os.str();
}

}  // namespace gsa
