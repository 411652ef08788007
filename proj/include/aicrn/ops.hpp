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

#ifndef AICRN_OPS_HPP_
#define AICRN_OPS_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "aicrn/error.hpp"
#include "aicrn/tensor.hpp"

namespace aicrn {

enum class BinaryKind { add, sub, mul };
enum class ReduceKind { mean, sum, max };
enum class Activation { relu, leaky_relu, sigmoid };

inline const char* to_string(BinaryKind k) {
  switch (k) {
    case BinaryKind::add: return "add";
    case BinaryKind::sub: return "sub";
    case BinaryKind::mul: return "mul";
  }
  return "?";
}

inline const char* to_string(ReduceKind k) {
  switch (k) {
    case ReduceKind::mean: return "reduce_mean";
    case ReduceKind::sum: return "reduce_sum";
    case ReduceKind::max: return "reduce_max";
  }
  return "?";
}

inline const char* to_string(Activation k) {
  switch (k) {
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

namespace detail {

// Splits a shape around `axis` into (outer, extent, inner) for strided loops.
struct AxisView {
  std::size_t outer = 1, extent = 1, inner = 1;
};

inline AxisView axis_view(const Shape& s, std::size_t axis) {
  if (axis >= s.rank()) {
    throw RangeError("axis " + std::to_string(axis) + " invalid for tensor of rank " + std::to_string(s.rank()));
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= s[i];
  v.extent = s[axis];
  for (std::size_t i = axis + 1; i < s.rank(); ++i) v.inner *= s[i];
  return v;
}

}  // namespace detail

namespace detail {

template <typename T>
void binary_row(BinaryKind kind, const T* __restrict a, const T* __restrict b, bool b_scalar, T* __restrict o,
                std::size_t n) {
  if (b_scalar) {
    const T bs = b[0];
    switch (kind) {
      case BinaryKind::add:
#pragma omp simd
        for (std::size_t t = 0; t < n; ++t) o[t] = a[t] + bs;
        break;
      case BinaryKind::sub:
#pragma omp simd
        for (std::size_t t = 0; t < n; ++t) o[t] = a[t] - bs;
        break;
      case BinaryKind::mul:
#pragma omp simd
        for (std::size_t t = 0; t < n; ++t) o[t] = a[t] * bs;
        break;
    }
    return;
  }
  switch (kind) {
    case BinaryKind::add:
#pragma omp simd
      for (std::size_t t = 0; t < n; ++t) o[t] = a[t] + b[t];
      break;
    case BinaryKind::sub:
#pragma omp simd
      for (std::size_t t = 0; t < n; ++t) o[t] = a[t] - b[t];
      break;
    case BinaryKind::mul:
#pragma omp simd
      for (std::size_t t = 0; t < n; ++t) o[t] = a[t] * b[t];
      break;
  }
}

template <typename T>
void binary_row_backward(BinaryKind kind, const T* __restrict g, const T* __restrict a, const T* __restrict b,
                         bool b_scalar, T* __restrict ga, T* __restrict gb, std::size_t n) {
  const T sign = kind == BinaryKind::sub ? T(-1) : T(1);
  if (ga) {
    if (kind == BinaryKind::mul) {
      if (b_scalar) {
        const T bs = b[0];
#pragma omp simd
        for (std::size_t t = 0; t < n; ++t) ga[t] += g[t] * bs;
      } else {
#pragma omp simd
        for (std::size_t t = 0; t < n; ++t) ga[t] += g[t] * b[t];
      }
    } else {
#pragma omp simd
      for (std::size_t t = 0; t < n; ++t) ga[t] += g[t];
    }
  }
  if (!gb) return;
  if (b_scalar) {
    T acc = 0;
    if (kind == BinaryKind::mul) {
#pragma omp simd reduction(+ : acc)
      for (std::size_t t = 0; t < n; ++t) acc += g[t] * a[t];
    } else {
#pragma omp simd reduction(+ : acc)
      for (std::size_t t = 0; t < n; ++t) acc += g[t];
    }
    gb[0] += sign * acc;
  } else if (kind == BinaryKind::mul) {
#pragma omp simd
    for (std::size_t t = 0; t < n; ++t) gb[t] += g[t] * a[t];
  } else {
#pragma omp simd
    for (std::size_t t = 0; t < n; ++t) gb[t] += sign * g[t];
  }
}

}  // namespace detail

/// out = a (op) b. `b` broadcasts to `a` numpy-style: shapes are right-aligned
/// and every extent of b must equal a's or be 1. Broadcast axes are summed
/// in the backward pass.
template <typename T>
Tensor<T> elementwise(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b, BinaryKind kind) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.rank() > sa.rank()) {
    throw BroadcastError("cannot broadcast " + sb.str() + " to " + sa.str());
  }
  const auto da = sa.padded();
  const auto db = sb.padded();
  std::array<std::size_t, 3> bstride{};
  {
    std::size_t stride = 1;
    for (int ax = 2; ax >= 0; --ax) {
      const auto i = static_cast<std::size_t>(ax);
      if (db[i] != da[i] && db[i] != 1) {
        throw BroadcastError("cannot broadcast " + sb.str() + " to " + sa.str());
      }
      bstride[i] = db[i] == 1 ? 0 : stride;
      stride *= db[i];
    }
  }

  Tensor<T> out = Tensor<T>::zeros(sa);
  const std::size_t rows = da[0] * da[1], len = da[2];
  // Row r of `a` pairs with the b row starting at b_base(r); along the last
  // axis b either advances with a (stride 1) or repeats one value (stride 0).
  auto b_base = [da, bstride](std::size_t r) { return (r / da[1]) * bstride[0] + (r % da[1]) * bstride[1]; };
  const bool b_scalar_row = bstride[2] == 0;
  {
    const T* av = a.data().data();
    const T* bv = b.data().data();
    T* ov = out.data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      detail::binary_row(kind, av + r * len, bv + b_base(r), b_scalar_row, ov + r * len, len);
    }
  }

  if (!tape.wants_grad({&a, &b})) {
    tape.validate(to_string(kind), out);
    return out;
  }
  auto an = a.node_ptr();
  auto bn = b.node_ptr();
  auto on = out.node_ptr();
  tape.record(to_string(kind), {&a, &b}, out, [an, bn, on, kind, rows, len, b_base, b_scalar_row]() {
    const T* g = on->grad.data();
    const T* av = an->value.data();
    const T* bv = bn->value.data();
    T* ga = an->requires_grad ? an->ensure_grad().data() : nullptr;
    T* gb = bn->requires_grad ? bn->ensure_grad().data() : nullptr;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t j = b_base(r);
      detail::binary_row_backward(kind, g + r * len, av + r * len, bv + j, b_scalar_row, ga ? ga + r * len : nullptr,
                                  gb ? gb + j : nullptr, len);
    }
  });
  return out;
}

template <typename T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(tape, a, b, BinaryKind::add);
}
template <typename T>
Tensor<T> sub(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(tape, a, b, BinaryKind::sub);
}
template <typename T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(tape, a, b, BinaryKind::mul);
}

/// (B x M) . (M x N) -> (B x N).
template <typename T>
Tensor<T> matmul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& w) {
  if (a.shape().rank() != 2 || w.shape().rank() != 2) {
    throw DimensionError("matmul expects rank-2 operands, got " + a.shape().str() + " and " + w.shape().str());
  }
  const std::size_t rows = a.dim(0), inner = a.dim(1), cols = w.dim(1);
  if (w.dim(0) != inner) {
    throw DimensionError("matmul inner extents differ: " + a.shape().str() + " . " + w.shape().str());
  }
  Tensor<T> out = Tensor<T>::zeros({rows, cols});
  auto av = a.data();
  auto wv = w.data();
  auto ov = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < inner; ++k) {
      const T x = av[r * inner + k];
      for (std::size_t c = 0; c < cols; ++c) ov[r * cols + c] += x * wv[k * cols + c];
    }
  }
  if (!tape.wants_grad({&a, &w})) {
    tape.validate("matmul", out);
    return out;
  }
  auto an = a.node_ptr();
  auto wn = w.node_ptr();
  auto on = out.node_ptr();
  tape.record("matmul", {&a, &w}, out, [an, wn, on, rows, inner, cols]() {
    const auto& g = on->grad;
    if (an->requires_grad) {
      auto& ga = an->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < inner; ++k) {
          T acc = 0;
          for (std::size_t c = 0; c < cols; ++c) acc += g[r * cols + c] * wn->value[k * cols + c];
          ga[r * inner + k] += acc;
        }
    }
    if (wn->requires_grad) {
      auto& gw = wn->ensure_grad();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < inner; ++k) {
          const T x = an->value[r * inner + k];
          for (std::size_t c = 0; c < cols; ++c) gw[k * cols + c] += x * g[r * cols + c];
        }
    }
  });
  return out;
}

/// Reduces one axis to extent 1. Max routes the gradient to the first
/// maximal element along the axis.
template <typename T>
Tensor<T> reduce(Tape<T>& tape, const Tensor<T>& a, std::size_t axis, ReduceKind kind) {
  const auto v = detail::axis_view(a.shape(), axis);
  Tensor<T> out = Tensor<T>::zeros(a.shape().with(axis, 1));
  auto av = a.data();
  auto ov = out.data();
  std::vector<std::size_t> argmax;
  if (kind == ReduceKind::max) argmax.resize(out.numel());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      const std::size_t base = o * v.extent * v.inner + i;
      const std::size_t oi = o * v.inner + i;
      if (kind == ReduceKind::max) {
        std::size_t best = 0;
        T m = av[base];
        for (std::size_t k = 1; k < v.extent; ++k) {
          const T x = av[base + k * v.inner];
          if (x > m) {
            m = x;
            best = k;
          }
        }
        ov[oi] = m;
        argmax[oi] = best;
      } else {
        T s = 0;
        for (std::size_t k = 0; k < v.extent; ++k) s += av[base + k * v.inner];
        ov[oi] = kind == ReduceKind::mean ? s / static_cast<T>(v.extent) : s;
      }
    }
  }
  if (!tape.wants_grad({&a})) {
    tape.validate(to_string(kind), out);
    return out;
  }
  auto an = a.node_ptr();
  auto on = out.node_ptr();
  tape.record(to_string(kind), {&a}, out, [an, on, v, kind, argmax = std::move(argmax)]() {
    const auto& g = on->grad;
    auto& ga = an->ensure_grad();
    const T scale = kind == ReduceKind::mean ? T(1) / static_cast<T>(v.extent) : T(1);
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t base = o * v.extent * v.inner + i;
        const std::size_t oi = o * v.inner + i;
        if (kind == ReduceKind::max) {
          ga[base + argmax[oi] * v.inner] += g[oi];
        } else {
          for (std::size_t k = 0; k < v.extent; ++k) ga[base + k * v.inner] += g[oi] * scale;
        }
      }
    }
  });
  return out;
}

namespace detail {

template <typename T>
Tensor<T> reduce_all(Tape<T>& tape, const Tensor<T>& a, bool mean) {
  T s = 0;
  for (T x : a.data()) s += x;
  const T n = static_cast<T>(a.numel());
  Tensor<T> out(Shape{}, {mean ? s / n : s});
  const char* name = mean ? "mean_all" : "sum_all";
  if (!tape.wants_grad({&a})) {
    tape.validate(name, out);
    return out;
  }
  auto an = a.node_ptr();
  auto on = out.node_ptr();
  tape.record(name, {&a}, out, [an, on, mean, n]() {
    const T g = mean ? on->grad[0] / n : on->grad[0];
    for (auto& x : an->ensure_grad()) x += g;
  });
  return out;
}

}  // namespace detail

/// Scalar (rank-0) sum of every element.
template <typename T>
Tensor<T> sum_all(Tape<T>& tape, const Tensor<T>& a) {
  return detail::reduce_all(tape, a, false);
}

template <typename T>
Tensor<T> mean_all(Tape<T>& tape, const Tensor<T>& a) {
  return detail::reduce_all(tape, a, true);
}

template <typename T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& a, const Shape& shape) {
  if (shape.numel() != a.numel()) {
    throw DimensionError("cannot reshape " + a.shape().str() + " to " + shape.str());
  }
  Tensor<T> out(shape, a.values());
  if (!tape.wants_grad({&a})) return out;
  auto an = a.node_ptr();
  auto on = out.node_ptr();
  tape.record("reshape", {&a}, out, [an, on]() {
    auto& ga = an->ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += on->grad[i];
  });
  return out;
}

/// Joins `a` and `b` along `axis`; every other extent must agree.
template <typename T>
Tensor<T> concat(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b, std::size_t axis) {
  const auto va = detail::axis_view(a.shape(), axis);
  if (a.shape().rank() != b.shape().rank()) {
    throw DimensionError("concat rank mismatch: " + a.shape().str() + " vs " + b.shape().str());
  }
  const auto vb = detail::axis_view(b.shape(), axis);
  if (va.outer != vb.outer || va.inner != vb.inner) {
    throw DimensionError("concat extents differ off-axis: " + a.shape().str() + " vs " + b.shape().str());
  }
  const std::size_t extent = va.extent + vb.extent;
  Tensor<T> out = Tensor<T>::zeros(a.shape().with(axis, extent));
  auto ov = out.data();
  auto av = a.data();
  auto bv = b.data();
  const std::size_t na = va.extent * va.inner, nb = vb.extent * vb.inner;
  for (std::size_t o = 0; o < va.outer; ++o) {
    std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(o * na), na,
                ov.begin() + static_cast<std::ptrdiff_t>(o * (na + nb)));
    std::copy_n(bv.begin() + static_cast<std::ptrdiff_t>(o * nb), nb,
                ov.begin() + static_cast<std::ptrdiff_t>(o * (na + nb) + na));
  }
  if (!tape.wants_grad({&a, &b})) return out;
  auto an = a.node_ptr();
  auto bn = b.node_ptr();
  auto on = out.node_ptr();
  tape.record("concat", {&a, &b}, out, [an, bn, on, outer = va.outer, na, nb]() {
    const auto& g = on->grad;
    for (std::size_t o = 0; o < outer; ++o) {
      if (an->requires_grad) {
        auto& ga = an->ensure_grad();
        for (std::size_t i = 0; i < na; ++i) ga[o * na + i] += g[o * (na + nb) + i];
      }
      if (bn->requires_grad) {
        auto& gb = bn->ensure_grad();
        for (std::size_t i = 0; i < nb; ++i) gb[o * nb + i] += g[o * (na + nb) + na + i];
      }
    }
  });
  return out;
}

template <typename T>
T sigmoid_scalar(T x) {
  // Split on sign so exp never overflows.
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

namespace detail {

template <typename T>
void leaky_forward(const T* __restrict x, T* __restrict out, std::size_t n, T slope) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    out[i] = v < T(0) ? slope * v : v;
  }
}

template <typename T>
void leaky_backward(const T* __restrict x, const T* __restrict g, T* __restrict gx, std::size_t n, T slope) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const T gi = g[i];
    gx[i] += x[i] < T(0) ? slope * gi : gi;
  }
}

template <typename T>
void relu_forward(const T* __restrict x, T* __restrict out, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const T v = x[i];
    out[i] = v > T(0) ? v : T(0);
  }
}

// Subgradient 0 at the origin.
template <typename T>
void relu_backward(const T* __restrict x, const T* __restrict g, T* __restrict gx, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const T gi = g[i];
    gx[i] += x[i] > T(0) ? gi : T(0);
  }
}

template <typename T>
void sigmoid_backward(const T* __restrict s, const T* __restrict g, T* __restrict gx, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) gx[i] += g[i] * s[i] * (T(1) - s[i]);
}

}  // namespace detail

/// Pointwise nonlinearity. `slope` is the negative-side gain of leaky_relu and
/// is ignored otherwise.
template <typename T>
Tensor<T> activation(Tape<T>& tape, const Tensor<T>& x, Activation kind, T slope = T(0.1)) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  const T* xv = x.data().data();
  T* ov = out.data().data();
  const std::size_t n = x.numel();
  switch (kind) {
    case Activation::relu:
      detail::relu_forward(xv, ov, n);
      break;
    case Activation::leaky_relu:
      detail::leaky_forward(xv, ov, n, slope);
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) ov[i] = sigmoid_scalar(xv[i]);
      break;
  }
  if (!tape.wants_grad({&x})) {
    tape.validate(to_string(kind), out);
    return out;
  }
  auto xn = x.node_ptr();
  auto on = out.node_ptr();
  tape.record(to_string(kind), {&x}, out, [xn, on, kind, slope]() {
    const std::size_t n = on->grad.size();
    T* gx = xn->ensure_grad().data();
    switch (kind) {
      case Activation::relu:
        detail::relu_backward(xn->value.data(), on->grad.data(), gx, n);
        break;
      case Activation::leaky_relu:
        detail::leaky_backward(xn->value.data(), on->grad.data(), gx, n, slope);
        break;
      case Activation::sigmoid:
        detail::sigmoid_backward(on->value.data(), on->grad.data(), gx, n);
        break;
    }
  });
  return out;
}

template <typename T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& x) {
  return activation(tape, x, Activation::relu);
}
template <typename T>
Tensor<T> leaky_relu(Tape<T>& tape, const Tensor<T>& x, T slope) {
  return activation(tape, x, Activation::leaky_relu, slope);
}
template <typename T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& x) {
  return activation(tape, x, Activation::sigmoid);
}

/// out = scale * x + shift with constant (non-trainable) coefficients.
template <typename T>
Tensor<T> affine(Tape<T>& tape, const Tensor<T>& x, T scale, T shift) {
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = scale * xv[i] + shift;
  if (!tape.wants_grad({&x})) return out;
  auto xn = x.node_ptr();
  auto on = out.node_ptr();
  tape.record("affine", {&x}, out, [xn, on, scale]() {
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += scale * on->grad[i];
  });
  return out;
}

}  // namespace aicrn

#endif  // AICRN_OPS_HPP_
