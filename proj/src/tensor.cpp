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

#include "gsa/tensor.hpp"

#include <sstream>

namespace gsa {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  for (auto d : shape) {
    if (d <= 0) throw ContractError("tensor extents must be positive, got " + shape_str(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)) {
  check_shape(shape_);
  if (shape_numel(shape_) != static_cast<std::int64_t>(data.size())) {
    throw ContractError("tensor shape " + shape_str(shape_) + " needs " +
                        std::to_string(shape_numel(shape_)) + " values, got " +
                        std::to_string(data.size()));
  }
  data_ = std::make_shared<const std::vector<float>>(std::move(data));
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_ = std::make_shared<const std::vector<float>>(
      static_cast<std::size_t>(shape_numel(shape_)), fill);
}

std::int64_t Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw ContractError("axis " + std::to_string(axis) + " out of range for shape " +
                        shape_str(shape_));
  }
  return shape_[static_cast<std::size_t>(axis)];
}

float Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape_));
  return (*data_)[0];
}

Tensor Tensor::detach() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = data_;
  return t;
}

Tensor Tensor::with_shape(Shape shape) const {
  check_shape(shape);
  if (shape_numel(shape) != numel()) {
    throw ContractError("cannot view " + shape_str(shape_) + " as " + shape_str(shape));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

Tensor Tape::watch(const Tensor& value) {
  Tensor t = value.detach();
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{"leaf", {}, t.shape(), nullptr});
  return t;
}

Tensor Tape::record(std::string op, std::span<const Tensor> inputs, const Tensor& result,
                    BackwardFn backward) {
  Node node{std::move(op), {}, result.shape(), std::move(backward)};
  node.inputs.reserve(inputs.size());
  for (const auto& in : inputs) {
    node.inputs.push_back(in.tape_ == this ? in.node_ : -1);
  }
  Tensor t = result.detach();
  t.tape_ = this;
  t.node_ = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(node));
  return t;
}

void Tape::backward(const Tensor& root) {
  if (root.tape_ != this) throw ContractError("backward root is not recorded on this tape");
  if (root.numel() != 1) {
    throw ContractError("backward root must be scalar, got shape " + shape_str(root.shape()));
  }
  grads_.assign(nodes_.size(), {});
  grads_[static_cast<std::size_t>(root.node_)].assign(1, 1.0f);
  std::vector<std::vector<float>*> sinks;
  for (int id = root.node_; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    auto& g = grads_[static_cast<std::size_t>(id)];
    if (g.empty() || !node.backward) continue;
    sinks.assign(node.inputs.size(), nullptr);
    bool any = false;
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      const int in = node.inputs[i];
      if (in < 0) continue;
      auto& gi = grads_[static_cast<std::size_t>(in)];
      if (gi.empty()) {
        gi.assign(static_cast<std::size_t>(shape_numel(nodes_[static_cast<std::size_t>(in)].shape)),
                  0.0f);
      }
      sinks[i] = &gi;
      any = true;
    }
    if (any) node.backward(g, sinks);
  }
}

Tensor Tape::grad(const Tensor& t) const {
  if (t.tape_ != this) throw ContractError("grad() of a tensor not recorded on this tape");
  const auto id = static_cast<std::size_t>(t.node_);
  if (id >= grads_.size() || grads_[id].empty()) return Tensor(t.shape());
  return Tensor(t.shape(), grads_[id]);
}

Tensor taped(std::string op, std::span<const Tensor> inputs, Tensor result,
             BackwardFn backward) {
  Tape* tape = nullptr;
  for (const auto& in : inputs) {
    if (in.tape() == nullptr) continue;
    if (tape != nullptr && tape != in.tape()) {
      throw ContractError("op '" + op + "' mixes tensors from different tapes");
    }
    tape = in.tape();
  }
  if (tape == nullptr) return result;
  return tape->record(std::move(op), inputs, result, std::move(backward));
}

Tensor taped(std::string op, std::initializer_list<Tensor> inputs, Tensor result,
             BackwardFn backward) {
  return taped(std::move(op), std::span<const Tensor>(inputs.begin(), inputs.size()),
               std::move(result), std::move(backward));
}

}  // namespace gsa
