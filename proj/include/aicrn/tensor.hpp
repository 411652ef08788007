// Copyright 2026 The AICRN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AICRN_TENSOR_HPP_
#define AICRN_TENSOR_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aicrn/error.hpp"

namespace aicrn {

/// Extents of a tensor of rank 0..3. By convention rank-3 tensors are
/// (batch, channels, time).
class Shape {
 public:
  static constexpr std::size_t kMaxRank = 3;

  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims) {
    if (dims.size() > kMaxRank) throw RangeError("tensor rank above 3 is not supported");
    std::copy(dims.begin(), dims.end(), dims_.begin());
    rank_ = dims.size();
  }
  static Shape from(std::span<const std::size_t> dims) {
    if (dims.size() > kMaxRank) throw RangeError("tensor rank above 3 is not supported");
    Shape s;
    std::copy(dims.begin(), dims.end(), s.dims_.begin());
    s.rank_ = dims.size();
    return s;
  }

  std::size_t rank() const { return rank_; }
  std::size_t operator[](std::size_t axis) const {
    if (axis >= rank_) throw RangeError("axis " + std::to_string(axis) + " out of range for " + str());
    return dims_[axis];
  }
  std::size_t numel() const {
    std::size_t n = 1;
    for (std::size_t i = 0; i < rank_; ++i) n *= dims_[i];
    return n;
  }
  std::span<const std::size_t> dims() const { return {dims_.data(), rank_}; }

  Shape with(std::size_t axis, std::size_t extent) const {
    Shape s = *this;
    if (axis >= rank_) throw RangeError("axis " + std::to_string(axis) + " out of range for " + str());
    s.dims_[axis] = extent;
    return s;
  }

  /// Left-pads with unit extents up to rank 3.
  std::array<std::size_t, 3> padded() const {
    std::array<std::size_t, 3> out{1, 1, 1};
    std::copy(dims_.begin(), dims_.begin() + static_cast<std::ptrdiff_t>(rank_),
              out.begin() + static_cast<std::ptrdiff_t>(kMaxRank - rank_));
    return out;
  }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < rank_; ++i) {
      if (i) s += "x";
      s += std::to_string(dims_[i]);
    }
    return s + ")";
  }

  friend bool operator==(const Shape& a, const Shape& b) {
    return a.rank_ == b.rank_ && std::equal(a.dims_.begin(), a.dims_.begin() + static_cast<std::ptrdiff_t>(a.rank_),
                                            b.dims_.begin());
  }

 private:
  std::array<std::size_t, kMaxRank> dims_{};
  std::size_t rank_ = 0;
};

namespace detail {

inline std::uint64_t next_tensor_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until first gradient write
  bool requires_grad = false;
  std::uint64_t id = next_tensor_id();

  std::vector<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

}  // namespace detail

/// Dense row-major tensor handle. Copies share storage; use clone() for a deep copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false) {
    return Tensor(shape, std::vector<T>(shape.numel(), T(0)), requires_grad);
  }
  static Tensor full(const Shape& shape, T v, bool requires_grad = false) {
    return Tensor(shape, std::vector<T>(shape.numel(), v), requires_grad);
  }

  Tensor(const Shape& shape, std::vector<T> data, bool requires_grad = false)
      : node_(std::make_shared<detail::Node<T>>()) {
    if (shape.numel() != data.size()) {
      throw DimensionError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                           shape.str());
    }
    node_->shape = shape;
    node_->value = std::move(data);
    node_->requires_grad = requires_grad;
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->value.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape[axis]; }
  std::uint64_t id() const { return node_->id; }

  std::span<T> data() { return node_->value; }
  std::span<const T> data() const { return node_->value; }
  std::vector<T>& values() { return node_->value; }
  const std::vector<T>& values() const { return node_->value; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_->grad.size() == node_->value.size() && !node_->value.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> grad_mut() { return node_->ensure_grad(); }
  void zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
  }

  T item() const {
    if (numel() != 1) throw ContractError("item() on tensor of shape " + shape().str());
    return node_->value[0];
  }

  T& at(std::size_t b, std::size_t c, std::size_t t) { return node_->value[offset(b, c, t)]; }
  T at(std::size_t b, std::size_t c, std::size_t t) const { return node_->value[offset(b, c, t)]; }

  Tensor clone() const {
    Tensor out(shape(), node_->value, node_->requires_grad);
    return out;
  }

  bool all_finite() const {
    return std::all_of(node_->value.begin(), node_->value.end(), [](T v) { return std::isfinite(v); });
  }

  detail::Node<T>& node() const { return *node_; }
  const std::shared_ptr<detail::Node<T>>& node_ptr() const { return node_; }

 private:
  std::size_t offset(std::size_t b, std::size_t c, std::size_t t) const {
    const auto& s = node_->shape;
    return (b * s[1] + c) * s[2] + t;
  }

  std::shared_ptr<detail::Node<T>> node_;
};

/// Define-by-run record of differentiable operations. A tape is filled by one
/// forward pass and consumed by backward(); build a fresh tape per pass.
///
/// A tape constructed with recording disabled is an inference context: ops
/// evaluate but keep no history and their outputs never require gradients.
template <typename T>
class Tape {
 public:
  struct Record {
    std::string op;
    std::vector<std::uint64_t> inputs;
    std::uint64_t output;
    std::shared_ptr<detail::Node<T>> out;
    std::function<void()> backward;
  };

  explicit Tape(bool recording = true) : recording_(recording) {}

  static Tape inference() { return Tape(false); }

  bool recording() const { return recording_; }

  /// Raise NonFiniteError as soon as an op produces NaN/Inf from its inputs.
  void set_check_finite(bool on) { check_finite_ = on; }
  bool check_finite() const { return check_finite_; }

  /// True when an op over `inputs` must be recorded.
  bool wants_grad(std::initializer_list<const Tensor<T>*> inputs) const {
    if (!recording_) return false;
    return std::any_of(inputs.begin(), inputs.end(), [](const Tensor<T>* t) { return t->requires_grad(); });
  }

  /// Registers `out` as produced by `op`. `backward` reads out's gradient and
  /// accumulates into the inputs that require gradients.
  void record(std::string_view op, std::initializer_list<const Tensor<T>*> inputs, Tensor<T>& out,
              std::function<void()> backward) {
    validate(op, out);
    out.set_requires_grad(true);
    Record r;
    r.op = std::string(op);
    for (const auto* t : inputs) r.inputs.push_back(t->id());
    r.output = out.id();
    r.out = out.node_ptr();
    r.backward = std::move(backward);
    records_.push_back(std::move(r));
  }

  /// Called by ops that produced `out` without recording; only runs the finite check.
  void validate(std::string_view op, const Tensor<T>& out) const {
    if (check_finite_ && !out.all_finite()) {
      throw NonFiniteError("op '" + std::string(op) + "' produced a non-finite value");
    }
  }

  /// Seeds d(loss)/d(loss) = 1 and runs every recorded backward rule once, in
  /// reverse order. Intermediate gradients are reset first, so leaf gradients
  /// accumulate across repeated calls until the caller zeroes them.
  void backward(const Tensor<T>& loss) {
    if (loss.numel() != 1) throw ContractError("backward requires a scalar loss, got shape " + loss.shape().str());
    if (records_.empty()) throw ContractError("backward on an empty tape");
    bool found = false;
    for (auto& r : records_) {
      auto& g = r.out->ensure_grad();
      std::fill(g.begin(), g.end(), T(0));
      if (r.output == loss.id()) found = true;
    }
    if (!found) throw ContractError("loss tensor was not produced on this tape");
    loss.node().grad[0] = T(1);
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->backward();
  }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<Record>& records() const { return records_; }
  void clear() { records_.clear(); }

 private:
  std::vector<Record> records_;
  bool recording_ = true;
  bool check_finite_ = false;
};

}  // namespace aicrn

#endif  // AICRN_TENSOR_HPP_
