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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gsa/errors.hpp"

namespace gsa {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

// Immutable row-major float32 array. Copies share the payload. A tensor
// produced by an op whose inputs live on a Tape is itself recorded there.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<float> data);
  explicit Tensor(Shape shape, float fill = 0.0f);

  static Tensor scalar(float value) { return Tensor(Shape{}, {value}); }

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::int64_t dim(int axis) const;
  std::int64_t numel() const { return static_cast<std::int64_t>(data_->size()); }
  std::span<const float> data() const { return *data_; }
  float operator[](std::int64_t i) const { return (*data_)[static_cast<std::size_t>(i)]; }
  float item() const;

  Tape* tape() const { return tape_; }
  int node() const { return node_; }
  bool on_tape() const { return tape_ != nullptr; }

  // Same payload, no tape attachment.
  Tensor detach() const;
  // Same payload viewed with another shape of equal element count; untaped.
  Tensor with_shape(Shape shape) const;

 private:
  friend class Tape;

  Shape shape_;
  std::shared_ptr<const std::vector<float>> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Receives the gradient of the node's output and accumulates (+=) into the
// gradient buffers of its inputs. A null buffer means that input does not
// need a gradient.
using BackwardFn = std::function<void(std::span<const float> grad_out,
                                      std::span<std::vector<float>* const> grad_in)>;

// Append-only record of a forward computation. One training step owns one
// tape; tensors recorded on it keep a raw pointer back, so the tape must
// outlive them while gradients are needed.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Registers `value` as a leaf and returns the attached tensor.
  Tensor watch(const Tensor& value);

  // Records `result` as computed by `op` from `inputs`. Inputs not on this
  // tape are treated as constants.
  Tensor record(std::string op, std::span<const Tensor> inputs, const Tensor& result,
                BackwardFn backward);

  // Reverse-mode sweep from a scalar root. Gradients of shared
  // subexpressions are summed.
  void backward(const Tensor& root);

  // Gradient of `t` from the last backward(); zeros if `t` was unreachable.
  Tensor grad(const Tensor& t) const;

  std::size_t size() const { return nodes_.size(); }
  const std::string& op_name(int node) const { return nodes_.at(node).op; }

 private:
  struct Node {
    std::string op;
    std::vector<int> inputs;
    Shape shape;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::vector<std::vector<float>> grads_;
};

// Records `result` on the tape shared by `inputs`, or returns it untouched
// when no input is taped. Mixing two different tapes is a ContractError.
Tensor taped(std::string op, std::initializer_list<Tensor> inputs, Tensor result,
             BackwardFn backward);
Tensor taped(std::string op, std::span<const Tensor> inputs, Tensor result,
             BackwardFn backward);

}  // namespace gsa
