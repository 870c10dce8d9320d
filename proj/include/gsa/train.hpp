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
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gsa/dataset.hpp"
#include "gsa/params.hpp"
#include "gsa/segnet.hpp"
#include "gsa/tensor.hpp"

namespace gsa {

struct TrainConfig {
  double base_lr = 0.01;
  double power = 0.9;
  std::int64_t max_iter = 2000;
  std::int64_t batch_size = 4;
  std::int64_t crop_h = 64;
  std::int64_t crop_w = 64;
  double scale_lo = 0.5;
  double scale_hi = 2.0;
  double flip_prob = 0.5;
  double momentum = 0.9;
  double weight_decay = 0.0;
  // Linear ramp of the learning rate over the first warmup_iters steps.
  std::int64_t warmup_iters = 0;
  // 0 disables periodic evaluation; the final iteration is always evaluated
  // when an eval set is given.
  std::int64_t eval_every = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// base_lr * (1 - iter / max_iter)^power. ContractError if iter is outside
// [0, max_iter].
double poly_lr(std::int64_t iter, const TrainConfig& cfg);
// poly_lr scaled by min(1, (iter + 1) / warmup_iters); the rate train() uses.
double scheduled_lr(std::int64_t iter, const TrainConfig& cfg);

// Velocity per parameter name.
using MomentumState = std::map<std::string, std::vector<float>>;

// v <- momentum * v + g (+ weight_decay * p);  p <- p - lr * v.
void sgd_step(ParamMap& params, const ParamMap& grads, double lr, MomentumState& state,
              double momentum, double weight_decay = 0.0);

// Mean over scored pixels of -log softmax(logits)[label]. `labels` holds one
// id per (B, H, W) position; pixels equal to `ignore_label` are skipped.
// Returns 0 with a zero gradient when no pixel is scored.
Tensor pixel_cross_entropy(const Tensor& logits, std::span<const std::uint8_t> labels,
                           std::uint8_t ignore_label = kIgnoreLabel);

// Random scale (bilinear image, nearest labels), horizontal flip, then crop to
// (crop_h, crop_w); regions outside the scaled image are zero / ignore.
SegSample augment(const SegSample& sample, const TrainConfig& cfg, std::mt19937_64& rng);
// Deterministic building blocks of augment().
SegSample scale_sample(const SegSample& sample, std::int64_t out_h, std::int64_t out_w);
SegSample flip_sample(const SegSample& sample);
SegSample crop_sample(const SegSample& sample, std::int64_t crop_h, std::int64_t crop_w,
                      std::int64_t top, std::int64_t left);

// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes, std::uint8_t ignore_label = kIgnoreLabel);

  int num_classes() const { return k_; }
  std::uint8_t ignore_label() const { return ignore_; }
  std::int64_t at(int gt, int pred) const { return counts_[static_cast<std::size_t>(gt * k_ + pred)]; }
  std::int64_t total() const;
  void add(int gt, int pred, std::int64_t n = 1);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix& other) const = default;

 private:
  int k_;
  std::uint8_t ignore_;
  std::vector<std::int64_t> counts_;
};

void accumulate_confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt,
                          ConfusionMatrix& cm);

struct MiouResult {
  double miou = 0.0;
  // nullopt for classes absent from both ground truth and prediction.
  std::vector<std::optional<double>> per_class;
};

// ContractError when every class is absent.
MiouResult miou(const ConfusionMatrix& cm);

// Argmax over the class axis of (B, H, W, K) logits.
std::vector<std::uint8_t> argmax_labels(const Tensor& logits);

// Single-scale inference over `samples`, `batch` images at a time.
ConfusionMatrix evaluate(const std::vector<SegSample>& samples, const ModelConfig& cfg,
                         const ParamMap& params, std::int64_t batch = 8,
                         std::vector<LabelMap>* predictions = nullptr);

struct TrainResult {
  ParamMap final_params;
  ParamMap best_params;
  double best_miou = -1.0;
  double final_miou = -1.0;
  std::vector<double> losses;
  std::vector<std::string> log;
};

// augment -> forward -> loss -> backward -> poly lr -> SGD, for max_iter
// steps. Each log line reads "iter=<n> lr=<f> loss=<f> [miou=<f>]"; `on_log`
// sees them as they are produced.
TrainResult train(const ModelConfig& model_cfg, const TrainConfig& cfg,
                  const std::vector<SegSample>& train_set, const std::vector<SegSample>& eval_set,
                  const ParamMap& initial,
                  const std::function<void(const std::string&)>& on_log = {});

}  // namespace gsa
