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

#include "gsa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gsa/attention.hpp"
#include "gsa/ops.hpp"
#include "gsa/segnet.hpp"
#include "gsa/sparsemax.hpp"
#include "gsa/train.hpp"

namespace gsa {

Tensor random_uniform(const Shape& shape, std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> data(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& v : data) v = dist(rng);
  return Tensor(shape, std::move(data));
}

GradCheckResult check_gradients(const std::string& name, const GradFn& fn,
                                const std::vector<Tensor>& inputs,
                                const GradCheckOptions& options,
                                const std::vector<bool>& probe_mask) {
  GradCheckResult result;
  result.name = name;

  const Tensor projection =
      random_uniform(fn(inputs).shape(), derive_seed(options.seed, name + "/projection"));
  auto objective = [&](const std::vector<Tensor>& xs) {
    const Tensor y = fn(xs);
    double acc = 0.0;
    for (std::int64_t i = 0; i < y.numel(); ++i) acc += double{projection[i]} * y[i];
    return acc;
  };

  Tape tape;
  std::vector<Tensor> watched;
  for (const auto& x : inputs) watched.push_back(tape.watch(x));
  tape.backward(sum(mul(fn(watched), projection)));
  std::vector<Tensor> grads;
  for (const auto& w : watched) grads.push_back(tape.grad(w));

  std::vector<std::size_t> probe_inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (probe_mask.empty() || probe_mask[i]) probe_inputs.push_back(i);
  }
  if (probe_inputs.empty()) throw ContractError("gradcheck '" + name + "': nothing to probe");

  std::mt19937_64 rng(derive_seed(options.seed, name + "/probes"));
  const double f0 = objective(inputs);
  const int max_attempts = options.probes * 20;
  int attempts = 0;
  std::vector<Tensor> xs = inputs;
  while (result.probes < options.probes && attempts < max_attempts) {
    ++attempts;
    const std::size_t which =
        probe_inputs[std::uniform_int_distribution<std::size_t>(0, probe_inputs.size() - 1)(rng)];
    const Tensor& base = inputs[which];
    const auto j = std::uniform_int_distribution<std::int64_t>(0, base.numel() - 1)(rng);
    const float x = base[j];
    const float xp = x + static_cast<float>(options.eps);
    const float xm = x - static_cast<float>(options.eps);

    std::vector<float> data(base.data().begin(), base.data().end());
    data[static_cast<std::size_t>(j)] = xp;
    xs[which] = Tensor(base.shape(), data);
    const double fp = objective(xs);
    data[static_cast<std::size_t>(j)] = xm;
    xs[which] = Tensor(base.shape(), data);
    const double fm = objective(xs);
    xs[which] = base;

    const double up = (fp - f0) / (double{xp} - x);
    const double down = (f0 - fm) / (double{x} - xm);
    const double scale = std::max({std::abs(up), std::abs(down), options.floor});
    if (std::abs(up - down) > options.kink_threshold * scale) {
      ++result.skipped_kinks;
      continue;
    }
    const double numeric = (fp - fm) / (double{xp} - xm);
    const double analytic = grads[which][j];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
    result.worst_rel_error = std::max(result.worst_rel_error, std::abs(analytic - numeric) / denom);
    ++result.probes;
  }
  result.passed = result.probes >= options.probes && result.worst_rel_error < options.tolerance;
  return result;
}

namespace {

struct Suite {
  std::string name;
  GradFn fn;
  std::vector<Tensor> inputs;
  std::vector<bool> mask;
};

Tensor rnd(const Shape& shape, std::uint64_t& seed) { return random_uniform(shape, ++seed); }

FcParams take_fc(std::span<const Tensor> in, std::size_t& i) {
  FcParams p{in[i], in[i + 1]};
  i += 2;
  return p;
}

std::vector<Suite> build_suites() {
  std::vector<Suite> suites;
  std::uint64_t seed = 100;

  for (int dilation : {1, 2}) {
    for (int stride : {1, 2}) {
      const ConvSpec spec{3, 3, dilation, stride, 3, 4};
      suites.push_back({"conv2d/d" + std::to_string(dilation) + "s" + std::to_string(stride),
                        [spec](std::span<const Tensor> in) { return conv2d(in[0], in[1], in[2], spec); },
                        {rnd({2, 5, 6, 3}, seed), rnd({3, 3, 3, 4}, seed), rnd({4}, seed)},
                        {}});
    }
  }
  suites.push_back({"fully_connected",
                    [](std::span<const Tensor> in) { return fully_connected(in[0], in[1], in[2]); },
                    {rnd({3, 5}, seed), rnd({5, 4}, seed), rnd({4}, seed)},
                    {}});
  suites.push_back({"matmul", [](std::span<const Tensor> in) { return matmul(in[0], in[1]); },
                    {rnd({4, 6}, seed), rnd({6, 3}, seed)},
                    {}});
  suites.push_back({"matmul/batched",
                    [](std::span<const Tensor> in) { return matmul(in[0], transpose(in[1])); },
                    {rnd({2, 4, 6}, seed), rnd({2, 3, 6}, seed)},
                    {}});
  suites.push_back({"global_avg_pool", [](std::span<const Tensor> in) { return global_avg_pool(in[0]); },
                    {rnd({2, 3, 4, 5}, seed)},
                    {}});
  suites.push_back({"bilinear_upsample",
                    [](std::span<const Tensor> in) { return bilinear_upsample(in[0], 2); },
                    {rnd({2, 3, 4, 3}, seed)},
                    {}});
  suites.push_back({"resize_bilinear",
                    [](std::span<const Tensor> in) { return resize_bilinear(in[0], 7, 5); },
                    {rnd({1, 3, 4, 2}, seed)},
                    {}});
  suites.push_back({"relu", [](std::span<const Tensor> in) { return relu(in[0]); },
                    {rnd({4, 8}, seed)},
                    {}});
  suites.push_back({"sigmoid", [](std::span<const Tensor> in) { return sigmoid(in[0]); },
                    {rnd({4, 8}, seed)},
                    {}});
  suites.push_back({"channel_scale",
                    [](std::span<const Tensor> in) { return channel_scale(in[0], in[1]); },
                    {rnd({2, 3, 3, 4}, seed), rnd({2, 4}, seed)},
                    {}});
  suites.push_back({"concat_channels",
                    [](std::span<const Tensor> in) {
                      return mul(concat_channels({in[0], in[1]}), concat_channels({in[1], in[0]}));
                    },
                    {rnd({2, 2, 2, 3}, seed), rnd({2, 2, 2, 3}, seed)},
                    {}});
  suites.push_back({"softmax_rows", [](std::span<const Tensor> in) { return softmax_rows(in[0]); },
                    {rnd({5, 7}, seed)},
                    {}});
  suites.push_back({"sparsemax_rows",
                    [](std::span<const Tensor> in) { return sparsemax_rows(scale(in[0], 3.0f)); },
                    {rnd({6, 7}, seed)},
                    {}});
  suites.push_back({"cross_entropy",
                    [](std::span<const Tensor> in) {
                      static const std::vector<std::uint8_t> labels{0, 2, 1, kIgnoreLabel, 2, 0};
                      return pixel_cross_entropy(scale(in[0], 2.0f), labels);
                    },
                    {rnd({1, 2, 3, 3}, seed)},
                    {}});

  // Selective attention over three 3x3 branches with 4, 3 and 5 channels.
  const std::vector<std::int64_t> widths{4, 3, 5};
  const std::int64_t total = 12, gamma = 4;
  auto branches = [&](std::vector<Tensor>& in) {
    for (auto c : widths) in.push_back(rnd({2, 3, 3, c}, seed));
  };
  {
    std::vector<Tensor> in;
    branches(in);
    in.push_back(rnd({total, gamma}, seed));
    in.push_back(rnd({gamma}, seed));
    in.push_back(rnd({gamma, gamma}, seed));
    in.push_back(rnd({gamma}, seed));
    for (auto c : widths) {
      in.push_back(rnd({gamma, c}, seed));
      in.push_back(rnd({c}, seed));
    }
    suites.push_back({"sa/full",
                      [](std::span<const Tensor> in) {
                        BranchSet bs(in.begin(), in.begin() + 3);
                        std::size_t i = 3;
                        SAParams p{take_fc(in, i), take_fc(in, i), {}};
                        while (i < in.size()) p.heads.push_back(take_fc(in, i));
                        return selective_attention(bs, p);
                      },
                      in,
                      {}});
  }
  {
    std::vector<Tensor> in;
    branches(in);
    in.push_back(rnd({total, gamma}, seed));
    in.push_back(rnd({gamma}, seed));
    in.push_back(rnd({gamma, gamma}, seed));
    in.push_back(rnd({gamma}, seed));
    in.push_back(rnd({gamma, total}, seed));
    in.push_back(rnd({total}, seed));
    suites.push_back({"sa/condense_only",
                      [](std::span<const Tensor> in) {
                        BranchSet bs(in.begin(), in.begin() + 3);
                        std::size_t i = 3;
                        SACondenseOnlyParams p{take_fc(in, i), take_fc(in, i), take_fc(in, i)};
                        return selective_attention_condense_only(bs, p);
                      },
                      in,
                      {}});
  }
  {
    std::vector<Tensor> in;
    branches(in);
    for (auto c : widths) {
      in.push_back(rnd({c, 4}, seed));
      in.push_back(rnd({4}, seed));
      in.push_back(rnd({4, c}, seed));
      in.push_back(rnd({c}, seed));
    }
    suites.push_back({"sa/diffuse_only",
                      [](std::span<const Tensor> in) {
                        BranchSet bs(in.begin(), in.begin() + 3);
                        std::size_t i = 3;
                        SADiffuseOnlyParams p;
                        while (i < in.size()) {
                          p.squeeze.push_back(take_fc(in, i));
                          p.excite.push_back(take_fc(in, i));
                        }
                        return selective_attention_diffuse_only(bs, p);
                      },
                      in,
                      {}});
  }
  for (AttentionMode mode : {AttentionMode::softmax, AttentionMode::sparsemax}) {
    std::vector<Tensor> in{rnd({2, 3, 3, 4}, seed), rnd({1, 1, 4, 4}, seed), rnd({4}, seed),
                           rnd({1, 1, 4, 4}, seed), rnd({4}, seed)};
    suites.push_back({mode == AttentionMode::softmax ? "gaf/softmax" : "gaf/sparsemax",
                      [mode](std::span<const Tensor> in) {
                        return gaf(in[0], mode, {scale(in[1], 2.0f), in[2], in[3], in[4]}).output;
                      },
                      in,
                      {}});
  }

  // Whole network on a 16x16 image with narrow layers.
  {
    ModelConfig cfg;
    cfg.head = HeadKind::gsa_aspp;
    cfg.decoder = DecoderKind::sa_dec;
    cfg.fxn_channels = {4, 6, 6, 8};
    cfg.dilations = {1, 2};
    cfg.head_channels = 4;
    cfg.decoder_channels = 4;
    cfg.low_level_channels = 4;
    cfg.num_classes = 3;
    cfg.seed = 7;
    const ParamMap init = init_model(cfg);
    std::vector<std::string> names;
    std::vector<Tensor> in{rnd({1, 16, 16, 3}, seed)};
    for (const auto& [name, t] : init) {
      names.push_back(name);
      in.push_back(t);
    }
    suites.push_back({"gsanet/end_to_end",
                      [cfg, names](std::span<const Tensor> in) {
                        ParamMap p;
                        for (std::size_t i = 0; i < names.size(); ++i) p.emplace(names[i], in[i + 1]);
                        return gsanet_forward(in[0], cfg, p);
                      },
                      in,
                      {}});
  }
  return suites;
}

}  // namespace

std::vector<std::string> gradcheck_suite_names() {
  std::vector<std::string> out;
  for (const auto& s : build_suites()) out.push_back(s.name);
  return out;
}

std::vector<GradCheckResult> run_gradcheck_suites(const std::string& filter,
                                                  const GradCheckOptions& options) {
  std::vector<GradCheckResult> out;
  for (const auto& s : build_suites()) {
    if (!filter.empty() && s.name.find(filter) == std::string::npos) continue;
    out.push_back(check_gradients(s.name, s.fn, s.inputs, options, s.mask));
  }
  return out;
}

}  // namespace gsa
