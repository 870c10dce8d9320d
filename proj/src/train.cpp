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

#include "gsa/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "gsa/ops.hpp"

namespace gsa {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ContractError("train config: " + msg); };
  if (!(base_lr > 0.0)) fail("base_lr must be > 0");
  if (!(power > 0.0)) fail("power must be > 0");
  if (max_iter < 0) fail("max_iter must be >= 0");
  if (batch_size <= 0) fail("batch_size must be positive");
  if (crop_h <= 0 || crop_w <= 0) fail("crop extents must be positive");
  if (!(scale_lo > 0.0) || !(scale_lo <= scale_hi)) fail("scale range needs 0 < lo <= hi");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) fail("flip_prob must be in [0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (eval_every < 0) fail("eval_every must be >= 0");
  if (warmup_iters < 0) fail("warmup_iters must be >= 0");
}

double poly_lr(std::int64_t iter, const TrainConfig& cfg) {
  if (iter < 0 || iter > cfg.max_iter) {
    throw ContractError("poly_lr: iter " + std::to_string(iter) + " outside [0, " +
                        std::to_string(cfg.max_iter) + "]");
  }
  if (cfg.max_iter == 0) return cfg.base_lr;
  const double progress = static_cast<double>(iter) / static_cast<double>(cfg.max_iter);
  return cfg.base_lr * std::pow(1.0 - progress, cfg.power);
}

double scheduled_lr(std::int64_t iter, const TrainConfig& cfg) {
  const double lr = poly_lr(iter, cfg);
  if (iter >= cfg.warmup_iters) return lr;
  return lr * static_cast<double>(iter + 1) / static_cast<double>(cfg.warmup_iters);
}

void sgd_step(ParamMap& params, const ParamMap& grads, double lr, MomentumState& state,
              double momentum, double weight_decay) {
  for (auto& [name, p] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    const Tensor& g = it->second;
    if (g.shape() != p.shape()) {
      throw ContractError("sgd_step: gradient for '" + name + "' has shape " +
                          shape_str(g.shape()) + ", parameter has " + shape_str(p.shape()));
    }
    auto& v = state[name];
    if (v.empty()) v.assign(static_cast<std::size_t>(p.numel()), 0.0f);
    std::vector<float> next(p.data().begin(), p.data().end());
    const auto m = static_cast<float>(momentum);
    const auto wd = static_cast<float>(weight_decay);
    const auto step = static_cast<float>(lr);
    for (std::size_t i = 0; i < next.size(); ++i) {
      v[i] = m * v[i] + g.data()[i] + wd * next[i];
      next[i] -= step * v[i];
    }
    p = Tensor(p.shape(), std::move(next));
  }
}

Tensor pixel_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels,
                           std::uint8_t ignore_label) {
  if (!logits.defined() || logits.rank() != 4) {
    throw ContractError("pixel_cross_entropy: expected (B, H, W, K) logits");
  }
  const auto K = static_cast<std::size_t>(logits.dim(3));
  const std::size_t pixels = static_cast<std::size_t>(logits.numel()) / K;
  if (labels.size() != pixels) {
    throw ContractError("pixel_cross_entropy: " + std::to_string(labels.size()) +
                        " labels for logits of shape " + shape_str(logits.shape()));
  }
  const auto x = logits.data();
  std::vector<float> grad(x.size(), 0.0f);
  double total = 0.0;
  std::size_t scored = 0;
  std::vector<double> prob(K);
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::uint8_t y = labels[p];
    if (y == ignore_label) continue;
    if (y >= K) {
      throw ContractError("pixel_cross_entropy: label " + std::to_string(y) +
                          " out of range for " + std::to_string(K) + " classes");
    }
    const float* row = x.data() + p * K;
    const double mx = *std::max_element(row, row + K);
    double z = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      prob[k] = std::exp(static_cast<double>(row[k]) - mx);
      z += prob[k];
    }
    total += std::log(z) + mx - static_cast<double>(row[y]);
    for (std::size_t k = 0; k < K; ++k) grad[p * K + k] = static_cast<float>(prob[k] / z);
    grad[p * K + y] -= 1.0f;
    ++scored;
  }
  const double inv = scored == 0 ? 0.0 : 1.0 / static_cast<double>(scored);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t k = 0; k < K; ++k) grad[p * K + k] = static_cast<float>(grad[p * K + k] * inv);
  }
  Tensor result = Tensor::scalar(static_cast<float>(total * inv));
  return taped("pixel_cross_entropy", {logits}, result,
               [grad = std::move(grad)](std::span<const float> g,
                                        std::span<std::vector<float>* const> s) {
                 for (std::size_t i = 0; i < grad.size(); ++i) (*s[0])[i] += g[0] * grad[i];
               });
}

SegSample scale_sample(const SegSample& sample, std::int64_t out_h, std::int64_t out_w) {
  const std::int64_t H = sample.label.height, W = sample.label.width;
  const Tensor img = resize_bilinear(sample.image.with_shape({1, H, W, 3}), out_h, out_w);
  LabelMap label{out_h, out_w, std::vector<std::uint8_t>(static_cast<std::size_t>(out_h * out_w))};
  for (std::int64_t y = 0; y < out_h; ++y) {
    const std::int64_t sy = std::min(H - 1, (2 * y + 1) * H / (2 * out_h));
    for (std::int64_t x = 0; x < out_w; ++x) {
      const std::int64_t sx = std::min(W - 1, (2 * x + 1) * W / (2 * out_w));
      label.data[static_cast<std::size_t>(y * out_w + x)] = sample.label.at(sy, sx);
    }
  }
  return {img.with_shape({out_h, out_w, 3}), std::move(label)};
}

SegSample flip_sample(const SegSample& sample) {
  const std::int64_t H = sample.label.height, W = sample.label.width;
  std::vector<float> img(static_cast<std::size_t>(H * W * 3));
  LabelMap label{H, W, std::vector<std::uint8_t>(static_cast<std::size_t>(H * W))};
  const auto src = sample.image.data();
  for (std::int64_t y = 0; y < H; ++y) {
    for (std::int64_t x = 0; x < W; ++x) {
      const std::int64_t from = y * W + (W - 1 - x);
      const std::int64_t to = y * W + x;
      for (int c = 0; c < 3; ++c) {
        img[static_cast<std::size_t>(to * 3 + c)] = src[static_cast<std::size_t>(from * 3 + c)];
      }
      label.data[static_cast<std::size_t>(to)] = sample.label.data[static_cast<std::size_t>(from)];
    }
  }
  return {Tensor({H, W, 3}, std::move(img)), std::move(label)};
}

SegSample crop_sample(const SegSample& sample, std::int64_t crop_h, std::int64_t crop_w,
                      std::int64_t top, std::int64_t left) {
  const std::int64_t H = sample.label.height, W = sample.label.width;
  std::vector<float> img(static_cast<std::size_t>(crop_h * crop_w * 3), 0.0f);
  LabelMap label{crop_h, crop_w,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(crop_h * crop_w), kIgnoreLabel)};
  const auto src = sample.image.data();
  for (std::int64_t y = 0; y < crop_h; ++y) {
    const std::int64_t sy = top + y;
    if (sy < 0 || sy >= H) continue;
    for (std::int64_t x = 0; x < crop_w; ++x) {
      const std::int64_t sx = left + x;
      if (sx < 0 || sx >= W) continue;
      for (int c = 0; c < 3; ++c) {
        img[static_cast<std::size_t>((y * crop_w + x) * 3 + c)] =
            src[static_cast<std::size_t>((sy * W + sx) * 3 + c)];
      }
      label.data[static_cast<std::size_t>(y * crop_w + x)] = sample.label.at(sy, sx);
    }
  }
  return {Tensor({crop_h, crop_w, 3}, std::move(img)), std::move(label)};
}

SegSample augment(const SegSample& sample, const TrainConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> scale_dist(cfg.scale_lo, cfg.scale_hi);
  std::bernoulli_distribution flip_dist(cfg.flip_prob);
  const double s = scale_dist(rng);
  const bool flip = flip_dist(rng);

  const std::int64_t H = sample.label.height, W = sample.label.width;
  const std::int64_t sh = std::max<std::int64_t>(1, std::llround(static_cast<double>(H) * s));
  const std::int64_t sw = std::max<std::int64_t>(1, std::llround(static_cast<double>(W) * s));
  SegSample out = (sh == H && sw == W) ? sample : scale_sample(sample, sh, sw);
  if (flip) out = flip_sample(out);

  const std::int64_t slack_h = std::max<std::int64_t>(sh, cfg.crop_h) - cfg.crop_h;
  const std::int64_t slack_w = std::max<std::int64_t>(sw, cfg.crop_w) - cfg.crop_w;
  const std::int64_t top = std::uniform_int_distribution<std::int64_t>(0, slack_h)(rng);
  const std::int64_t left = std::uniform_int_distribution<std::int64_t>(0, slack_w)(rng);
  if (top == 0 && left == 0 && sh == cfg.crop_h && sw == cfg.crop_w) return out;
  return crop_sample(out, cfg.crop_h, cfg.crop_w, top, left);
}

ConfusionMatrix::ConfusionMatrix(int num_classes, std::uint8_t ignore_label)
    : k_(num_classes), ignore_(ignore_label) {
  if (num_classes < 1) throw ContractError("confusion matrix needs at least one class");
  counts_.assign(static_cast<std::size_t>(k_ * k_), 0);
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

void ConfusionMatrix::add(int gt, int pred, std::int64_t n) {
  if (gt < 0 || gt >= k_ || pred < 0 || pred >= k_) {
    throw ContractError("confusion matrix entry (" + std::to_string(gt) + ", " +
                        std::to_string(pred) + ") outside " + std::to_string(k_) + " classes");
  }
  counts_[static_cast<std::size_t>(gt * k_ + pred)] += n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw ContractError("confusion matrices have different class counts");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

void accumulate_confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                          ConfusionMatrix& cm) {
  if (pred.size() != gt.size()) {
    throw ContractError("accumulate_confusion: " + std::to_string(pred.size()) +
                        " predictions vs " + std::to_string(gt.size()) + " labels");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] == cm.ignore_label()) continue;
    cm.add(gt[i], pred[i]);
  }
}

MiouResult miou(const ConfusionMatrix& cm) {
  const int K = cm.num_classes();
  MiouResult out;
  out.per_class.resize(static_cast<std::size_t>(K));
  double sum = 0.0;
  int present = 0;
  for (int k = 0; k < K; ++k) {
    const std::int64_t tp = cm.at(k, k);
    std::int64_t fp = 0, fn = 0;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      fp += cm.at(j, k);
      fn += cm.at(k, j);
    }
    const std::int64_t denom = tp + fp + fn;
    if (denom == 0) continue;
    const double iou = static_cast<double>(tp) / static_cast<double>(denom);
    out.per_class[static_cast<std::size_t>(k)] = iou;
    sum += iou;
    ++present;
  }
  if (present == 0) throw ContractError("miou: no class present in ground truth or prediction");
  out.miou = sum / present;
  return out;
}

std::vector<std::uint8_t> argmax_labels(const Tensor& logits) {
  if (logits.rank() != 4) throw ContractError("argmax_labels: expected (B, H, W, K) logits");
  const auto K = static_cast<std::size_t>(logits.dim(3));
  const std::size_t pixels = static_cast<std::size_t>(logits.numel()) / K;
  std::vector<std::uint8_t> out(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    const float* row = logits.data().data() + p * K;
    out[p] = static_cast<std::uint8_t>(std::max_element(row, row + K) - row);
  }
  return out;
}

ConfusionMatrix evaluate(const std::vector<SegSample>& samples, const ModelConfig& cfg,
                         const ParamMap& params, std::int64_t batch,
                         std::vector<LabelMap>* predictions) {
  ConfusionMatrix cm(cfg.num_classes);
  if (predictions) predictions->clear();
  for (std::size_t start = 0; start < samples.size(); start += static_cast<std::size_t>(batch)) {
    const std::size_t end = std::min(samples.size(), start + static_cast<std::size_t>(batch));
    std::vector<Tensor> images;
    std::vector<std::uint8_t> labels;
    for (std::size_t i = start; i < end; ++i) {
      images.push_back(samples[i].image);
      labels.insert(labels.end(), samples[i].label.data.begin(), samples[i].label.data.end());
    }
    const Tensor logits = gsanet_forward(stack_images(images), cfg, params);
    const auto pred = argmax_labels(logits);
    accumulate_confusion(pred, labels, cm);
    if (predictions) {
      const std::int64_t h = logits.dim(1), w = logits.dim(2);
      for (std::size_t i = 0; i < end - start; ++i) {
        predictions->push_back(
            {h, w, std::vector<std::uint8_t>(pred.begin() + static_cast<std::ptrdiff_t>(i * h * w),
                                             pred.begin() + static_cast<std::ptrdiff_t>((i + 1) * h * w))});
      }
    }
  }
  return cm;
}

namespace {

std::string format_log(std::int64_t iter, double lr, double loss, std::optional<double> m) {
  char buf[160];
  int n = std::snprintf(buf, sizeof buf, "iter=%lld lr=%.8g loss=%.8g", static_cast<long long>(iter),
                        lr, loss);
  if (m) std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), " miou=%.6f", *m);
  return buf;
}

}  // namespace

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& cfg,
                  const std::vector<SegSample>& train_set, const std::vector<SegSample>& eval_set,
                  const ParamMap& initial, const std::function<void(const std::string&)>& on_log) {
  model_cfg.validate();
  cfg.validate();
  if (train_set.empty()) throw ContractError("train: empty training set");
  check_params(initial, model_param_specs(model_cfg));

  TrainResult result;
  ParamMap params = initial;
  MomentumState state;
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  const std::uint64_t augment_seed = derive_seed(cfg.seed, "augment");
  std::vector<std::size_t> order(train_set.size());
  std::size_t cursor = order.size();

  for (std::int64_t iter = 0; iter < cfg.max_iter; ++iter) {
    const double lr = scheduled_lr(iter, cfg);
    std::vector<Tensor> images;
    std::vector<std::uint8_t> labels;
    for (std::int64_t slot = 0; slot < cfg.batch_size; ++slot) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        cursor = 0;
      }
      const SegSample& src = train_set[order[cursor++]];
      std::mt19937_64 rng(derive_seed(augment_seed, std::to_string(iter * cfg.batch_size + slot)));
      SegSample s = augment(src, cfg, rng);
      images.push_back(s.image);
      labels.insert(labels.end(), s.label.data.begin(), s.label.data.end());
    }

    Tape tape;
    const ParamMap leaves = watch_params(tape, params);
    const Tensor logits = gsanet_forward(stack_images(images), model_cfg, leaves);
    for (std::uint8_t y : labels) {
      if (y != kIgnoreLabel && y >= model_cfg.num_classes) {
        throw ContractError("train: label " + std::to_string(y) + " exceeds num_classes " +
                            std::to_string(model_cfg.num_classes));
      }
    }
    const Tensor loss = pixel_cross_entropy(logits, labels);
    tape.backward(loss);
    ParamMap grads;
    for (const auto& [name, leaf] : leaves) grads.emplace(name, tape.grad(leaf));
    sgd_step(params, grads, lr, state, cfg.momentum, cfg.weight_decay);

    const double loss_value = loss.item();
    if (!std::isfinite(loss_value)) {
      throw ContractError("train: loss became non-finite at iteration " + std::to_string(iter + 1));
    }
    result.losses.push_back(loss_value);
    std::optional<double> m;
    const bool last = iter + 1 == cfg.max_iter;
    if (!eval_set.empty() && (last || (cfg.eval_every > 0 && (iter + 1) % cfg.eval_every == 0))) {
      m = miou(evaluate(eval_set, model_cfg, params)).miou;
      if (*m > result.best_miou) {
        result.best_miou = *m;
        result.best_params = params;
      }
      if (last) result.final_miou = *m;
    }
    result.log.push_back(format_log(iter + 1, lr, loss_value, m));
    if (on_log) on_log(result.log.back());
  }
  result.final_params = params;
  if (result.best_params.empty()) result.best_params = params;
  return result;
}

}  // namespace gsa
