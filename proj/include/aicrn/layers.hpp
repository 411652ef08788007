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

#ifndef AICRN_LAYERS_HPP_
#define AICRN_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "aicrn/error.hpp"
#include "aicrn/ops.hpp"
#include "aicrn/tensor.hpp"

namespace aicrn {

using Rng = std::mt19937_64;

enum class Mode { train, eval };

/// He-normal draws: zero mean, standard deviation sqrt(2 / fan_in).
template <typename T>
std::vector<T> init_params(const Shape& shape, std::size_t fan_in, Rng& rng) {
  if (fan_in < 1) throw ConfigError("init_params: fan_in must be >= 1");
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  std::vector<T> out(shape.numel());
  for (auto& v : out) v = static_cast<T>(normal(rng));
  return out;
}

// ---------------------------------------------------------------------------
// Convolution

/// Stride-1 1-D convolution with zero 'same' padding. Weight layout is
/// (out_channels x in_channels x kernel).
template <typename T>
struct Conv1dParams {
  Tensor<T> weight;
  Tensor<T> bias;

  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t kernel() const { return weight.dim(2); }

  static Conv1dParams zeros(std::size_t out_ch, std::size_t in_ch, std::size_t k) {
    validate_shape(out_ch, in_ch, k);
    return {Tensor<T>::zeros({out_ch, in_ch, k}, true), Tensor<T>::zeros({out_ch}, true)};
  }

  static Conv1dParams he(std::size_t out_ch, std::size_t in_ch, std::size_t k, Rng& rng) {
    validate_shape(out_ch, in_ch, k);
    const Shape ws{out_ch, in_ch, k};
    return {Tensor<T>(ws, init_params<T>(ws, in_ch * k, rng), true), Tensor<T>::zeros({out_ch}, true)};
  }

  static void validate_shape(std::size_t out_ch, std::size_t in_ch, std::size_t k) {
    if (out_ch < 1 || in_ch < 1) throw ConfigError("conv1d: channel counts must be >= 1");
    if (k % 2 == 0) throw ConfigError("conv1d: kernel width must be odd for 'same' padding, got " + std::to_string(k));
  }
};

namespace detail {

// Time tile of the conv kernels: two 512-bit registers per output row.
template <typename T>
inline constexpr std::size_t kConvTile = 128 / sizeof(T);

/// Row stride of a zero-padded copy of a (C x len) block: 'same' padding on
/// the left, then enough zeros on the right that whole tiles stay in bounds.
template <typename T>
std::size_t padded_stride(std::size_t len, std::size_t k) {
  const std::size_t tiles = (len + kConvTile<T> - 1) / kConvTile<T>;
  return tiles * kConvTile<T> + k - 1;
}

template <typename T>
void pad_rows(const T* src, std::size_t rows, std::size_t len, std::size_t k, std::vector<T>& dst) {
  const std::size_t lp = padded_stride<T>(len, k);
  const std::size_t pad = (k - 1) / 2;
  dst.assign(rows * lp, T(0));
  for (std::size_t r = 0; r < rows; ++r) std::copy(src + r * len, src + (r + 1) * len, dst.data() + r * lp + pad);
}

/// out[co][t] (=|+=) bias[co] + sum_ci sum_j w[co][ci][j] * xp[ci][t + j] for
/// CB output rows starting at co0. xp is laid out by pad_rows.
template <typename T, std::size_t CB, bool Accumulate>
void conv_rows(const T* __restrict xp, std::size_t lp, std::size_t cin, const T* __restrict w, std::size_t k,
               std::size_t co0, const T* bias, T* __restrict out, std::size_t len) {
  constexpr std::size_t TT = kConvTile<T>;
  for (std::size_t t0 = 0; t0 < len; t0 += TT) {
    T acc[CB][TT];
    for (std::size_t cb = 0; cb < CB; ++cb) {
      const T b0 = bias ? bias[co0 + cb] : T(0);
      for (std::size_t tt = 0; tt < TT; ++tt) acc[cb][tt] = b0;
    }
    for (std::size_t ci = 0; ci < cin; ++ci) {
      for (std::size_t j = 0; j < k; ++j) {
        const T* xs = xp + ci * lp + t0 + j;
        for (std::size_t cb = 0; cb < CB; ++cb) {
          const T wv = w[((co0 + cb) * cin + ci) * k + j];
#pragma omp simd
          for (std::size_t tt = 0; tt < TT; ++tt) acc[cb][tt] += wv * xs[tt];
        }
      }
    }
    const std::size_t n = std::min(TT, len - t0);
    for (std::size_t cb = 0; cb < CB; ++cb) {
      T* orow = out + (co0 + cb) * len + t0;
      if constexpr (Accumulate) {
        for (std::size_t tt = 0; tt < n; ++tt) orow[tt] += acc[cb][tt];
      } else {
        for (std::size_t tt = 0; tt < n; ++tt) orow[tt] = acc[cb][tt];
      }
    }
  }
}

/// Full (cout x len) output block for one sample, blocked four rows at a time.
template <typename T, bool Accumulate>
void conv_block(const T* xp, std::size_t lp, std::size_t cin, const T* w, std::size_t k, std::size_t cout,
                const T* bias, T* out, std::size_t len) {
  std::size_t co = 0;
  for (; co + 4 <= cout; co += 4) conv_rows<T, 4, Accumulate>(xp, lp, cin, w, k, co, bias, out, len);
  for (; co < cout; ++co) conv_rows<T, 1, Accumulate>(xp, lp, cin, w, k, co, bias, out, len);
}

/// gw[co][ci][j] += sum_t g[co][t] * xp[ci][t + j] for one sample.
template <typename T>
void conv_weight_grad(const T* __restrict g, std::size_t len, const T* __restrict xp, std::size_t lp, std::size_t cin,
                      std::size_t cout, std::size_t k, T* __restrict gw) {
  constexpr std::size_t V = 64 / sizeof(T);
  constexpr std::size_t CB = 4;
  const std::size_t full = len / V * V;
  auto rows = [&](std::size_t co0, auto cb_count) {
    constexpr std::size_t N = decltype(cb_count)::value;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      for (std::size_t j = 0; j < k; ++j) {
        const T* xs = xp + ci * lp + j;
        T acc[N][V] = {};
        for (std::size_t t = 0; t < full; t += V) {
          for (std::size_t cb = 0; cb < N; ++cb) {
            const T* gr = g + (co0 + cb) * len + t;
#pragma omp simd
            for (std::size_t v = 0; v < V; ++v) acc[cb][v] += gr[v] * xs[t + v];
          }
        }
        for (std::size_t cb = 0; cb < N; ++cb) {
          T sum = 0;
          for (std::size_t v = 0; v < V; ++v) sum += acc[cb][v];
          const T* gr = g + (co0 + cb) * len;
          for (std::size_t t = full; t < len; ++t) sum += gr[t] * xs[t];
          gw[((co0 + cb) * cin + ci) * k + j] += sum;
        }
      }
    }
  };
  std::size_t co = 0;
  for (; co + CB <= cout; co += CB) rows(co, std::integral_constant<std::size_t, CB>{});
  for (; co < cout; ++co) rows(co, std::integral_constant<std::size_t, 1>{});
}

}  // namespace detail

/// Cross-correlation (no kernel flip) of (B x Cin x L) with padding (k-1)/2
/// on each side; output is (B x Cout x L).
template <typename T>
Tensor<T> conv1d(Tape<T>& tape, const Tensor<T>& x, const Conv1dParams<T>& p) {
  const Tensor<T>& w = p.weight;
  const Tensor<T>& bias = p.bias;
  if (w.shape().rank() != 3) throw DimensionError("conv1d weight must be rank 3, got " + w.shape().str());
  Conv1dParams<T>::validate_shape(w.dim(0), w.dim(1), w.dim(2));
  if (x.shape().rank() != 3) throw DimensionError("conv1d input must be (B x C x L), got " + x.shape().str());
  const std::size_t batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  if (cin != w.dim(1)) {
    throw DimensionError("conv1d channel mismatch: input has " + std::to_string(cin) + ", weight expects " +
                         std::to_string(w.dim(1)));
  }
  if (len < 1) throw DimensionError("conv1d: empty time axis");
  const std::size_t lp = detail::padded_stride<T>(len, k);

  Tensor<T> out = Tensor<T>::zeros({batch, cout, len});
  std::vector<T> xp;
  for (std::size_t b = 0; b < batch; ++b) {
    detail::pad_rows(x.data().data() + b * cin * len, cin, len, k, xp);
    detail::conv_block<T, false>(xp.data(), lp, cin, w.data().data(), k, cout, bias.data().data(),
                                 out.data().data() + b * cout * len, len);
  }

  if (!tape.wants_grad({&x, &w, &bias})) {
    tape.validate("conv1d", out);
    return out;
  }
  auto xn = x.node_ptr();
  auto wn = w.node_ptr();
  auto bn = bias.node_ptr();
  auto on = out.node_ptr();
  tape.record("conv1d", {&x, &w, &bias}, out, [=]() {
    const T* g = on->grad.data();
    T* gx = xn->requires_grad ? xn->ensure_grad().data() : nullptr;
    T* gw = wn->requires_grad ? wn->ensure_grad().data() : nullptr;
    T* gb = bn->requires_grad ? bn->ensure_grad().data() : nullptr;
    // dL/dx is the 'same' correlation of dL/dout with the kernel transposed
    // over channels and reversed in time.
    std::vector<T> wt;
    if (gx) {
      wt.resize(cin * cout * k);
      for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t ci = 0; ci < cin; ++ci)
          for (std::size_t j = 0; j < k; ++j) wt[(ci * cout + co) * k + (k - 1 - j)] = wn->value[(co * cin + ci) * k + j];
    }
    std::vector<T> buf;
    for (std::size_t b = 0; b < batch; ++b) {
      const T* gb_row = g + b * cout * len;
      if (gb) {
        for (std::size_t co = 0; co < cout; ++co) {
          T acc = 0;
          const T* grow = gb_row + co * len;
#pragma omp simd reduction(+ : acc)
          for (std::size_t t = 0; t < len; ++t) acc += grow[t];
          gb[co] += acc;
        }
      }
      if (gw) {
        detail::pad_rows(xn->value.data() + b * cin * len, cin, len, k, buf);
        detail::conv_weight_grad(gb_row, len, buf.data(), lp, cin, cout, k, gw);
      }
      if (gx) {
        detail::pad_rows(gb_row, cout, len, k, buf);
        detail::conv_block<T, true>(buf.data(), lp, cout, wt.data(), k, cin, static_cast<const T*>(nullptr),
                                    gx + b * cin * len, len);
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Batch normalization

/// Per-channel batch normalization over (batch x time). Running statistics are
/// buffers: they never require gradients and only change in train mode.
template <typename T>
struct BatchNorm1dParams {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;

  std::size_t channels() const { return gamma.numel(); }

  static BatchNorm1dParams make(std::size_t channels, double momentum = 0.1, double epsilon = 1e-5) {
    if (!(momentum > 0.0 && momentum < 1.0)) throw ConfigError("batchnorm momentum must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("batchnorm epsilon must be positive");
    return {Tensor<T>::full({channels}, T(1), true), Tensor<T>::zeros({channels}, true),
            Tensor<T>::zeros({channels}), Tensor<T>::full({channels}, T(1)), momentum, epsilon};
  }
};

template <typename T>
Tensor<T> batchnorm1d(Tape<T>& tape, const Tensor<T>& x, BatchNorm1dParams<T>& p, Mode mode) {
  if (x.shape().rank() != 3) throw DimensionError("batchnorm1d input must be (B x C x L), got " + x.shape().str());
  const std::size_t batch = x.dim(0), ch = x.dim(1), len = x.dim(2);
  if (ch != p.channels()) {
    throw DimensionError("batchnorm1d channel mismatch: input has " + std::to_string(ch) + ", params have " +
                         std::to_string(p.channels()));
  }
  const std::size_t n = batch * len;
  if (mode == Mode::train && n < 2) {
    throw DegenerateStatisticsError("batchnorm1d in train mode needs at least two values per channel, got " +
                                    x.shape().str());
  }

  std::vector<T> mean(ch), inv_std(ch);
  const T* xv = x.data().data();
  if (mode == Mode::train) {
    auto rm = p.running_mean.data();
    auto rv = p.running_var.data();
    for (std::size_t c = 0; c < ch; ++c) {
      double s = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* row = xv + (b * ch + c) * len;
        T acc = 0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t t = 0; t < len; ++t) acc += row[t];
        s += acc;
      }
      const double mu = s / static_cast<double>(n);
      double ss = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* row = xv + (b * ch + c) * len;
        const T m = static_cast<T>(mu);
        T acc = 0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t t = 0; t < len; ++t) acc += (row[t] - m) * (row[t] - m);
        ss += acc;
      }
      const double var = ss / static_cast<double>(n);
      mean[c] = static_cast<T>(mu);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + p.epsilon));
      const double unbiased = ss / static_cast<double>(n - 1);
      rm[c] = static_cast<T>((1.0 - p.momentum) * rm[c] + p.momentum * mu);
      rv[c] = static_cast<T>((1.0 - p.momentum) * rv[c] + p.momentum * unbiased);
    }
  } else {
    auto rm = p.running_mean.data();
    auto rv = p.running_var.data();
    for (std::size_t c = 0; c < ch; ++c) {
      mean[c] = rm[c];
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(rv[c]) + p.epsilon));
    }
  }

  Tensor<T> out = Tensor<T>::zeros(x.shape());
  T* ov = out.data().data();
  const T* gv = p.gamma.data().data();
  const T* bv = p.beta.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      const T* row = xv + (b * ch + c) * len;
      T* orow = ov + (b * ch + c) * len;
      const T scale = gv[c] * inv_std[c];
      const T shift = bv[c] - mean[c] * scale;
#pragma omp simd
      for (std::size_t t = 0; t < len; ++t) orow[t] = row[t] * scale + shift;
    }
  }

  if (!tape.wants_grad({&x, &p.gamma, &p.beta})) {
    tape.validate("batchnorm1d", out);
    return out;
  }
  auto xn = x.node_ptr();
  auto gn = p.gamma.node_ptr();
  auto btn = p.beta.node_ptr();
  auto on = out.node_ptr();
  const bool train = mode == Mode::train;
  tape.record("batchnorm1d", {&x, &p.gamma, &p.beta}, out, [=]() {
    const T* g = on->grad.data();
    const T* xv = xn->value.data();
    const T* gamma = gn->value.data();
    T* gx = xn->requires_grad ? xn->ensure_grad().data() : nullptr;
    T* ggamma = gn->requires_grad ? gn->ensure_grad().data() : nullptr;
    T* gbeta = btn->requires_grad ? btn->ensure_grad().data() : nullptr;
    for (std::size_t c = 0; c < ch; ++c) {
      const T mu = mean[c], is = inv_std[c];
      T sum_g = 0, sum_gx = 0;  // sum g, sum g * xhat
      for (std::size_t b = 0; b < batch; ++b) {
        const T* grow = g + (b * ch + c) * len;
        const T* row = xv + (b * ch + c) * len;
        T a1 = 0, a2 = 0;
#pragma omp simd reduction(+ : a1, a2)
        for (std::size_t t = 0; t < len; ++t) {
          a1 += grow[t];
          a2 += grow[t] * (row[t] - mu) * is;
        }
        sum_g += a1;
        sum_gx += a2;
      }
      if (gbeta) gbeta[c] += sum_g;
      if (ggamma) ggamma[c] += sum_gx;
      if (!gx) continue;
      const T nn = static_cast<T>(n);
      for (std::size_t b = 0; b < batch; ++b) {
        const T* grow = g + (b * ch + c) * len;
        const T* row = xv + (b * ch + c) * len;
        T* gxrow = gx + (b * ch + c) * len;
        if (train) {
          const T k = gamma[c] * is / nn;
#pragma omp simd
          for (std::size_t t = 0; t < len; ++t) {
            const T xhat = (row[t] - mu) * is;
            gxrow[t] += k * (nn * grow[t] - sum_g - xhat * sum_gx);
          }
        } else {
          const T k = gamma[c] * is;
#pragma omp simd
          for (std::size_t t = 0; t < len; ++t) gxrow[t] += k * grow[t];
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Pooling

/// Non-overlapping mean pooling with window and stride `k`; a trailing
/// remainder shorter than `k` is dropped.
template <typename T>
Tensor<T> avg_pool1d(Tape<T>& tape, const Tensor<T>& x, std::size_t k) {
  if (k < 1) throw ConfigError("avg_pool1d: kernel must be >= 1");
  if (x.shape().rank() != 3) throw DimensionError("avg_pool1d input must be (B x C x L), got " + x.shape().str());
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  if (len < k) {
    throw DimensionError("avg_pool1d: time extent " + std::to_string(len) + " shorter than kernel " +
                         std::to_string(k));
  }
  const std::size_t out_len = len / k;
  Tensor<T> out = Tensor<T>::zeros({x.dim(0), x.dim(1), out_len});
  const T* xv = x.data().data();
  T* ov = out.data().data();
  const T inv = T(1) / static_cast<T>(k);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < out_len; ++i) {
      T s = 0;
      for (std::size_t j = 0; j < k; ++j) s += xv[r * len + i * k + j];
      ov[r * out_len + i] = s * inv;
    }
  }
  if (!tape.wants_grad({&x})) return out;
  auto xn = x.node_ptr();
  auto on = out.node_ptr();
  tape.record("avg_pool1d", {&x}, out, [=]() {
    auto& gx = xn->ensure_grad();
    const auto& g = on->grad;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = 0; i < out_len; ++i)
        for (std::size_t j = 0; j < k; ++j) gx[r * len + i * k + j] += g[r * out_len + i] * inv;
  });
  return out;
}

/// Mean over time: (B x C x L) -> (B x C x 1).
template <typename T>
Tensor<T> global_avg_pool(Tape<T>& tape, const Tensor<T>& x) {
  if (x.shape().rank() != 3 || x.dim(2) < 1) {
    throw DimensionError("global_avg_pool input must be (B x C x L) with L >= 1, got " + x.shape().str());
  }
  return reduce(tape, x, 2, ReduceKind::mean);
}

// ---------------------------------------------------------------------------
// Dropout

/// Inverted dropout: in train mode each element is zeroed with probability
/// `p` and survivors are scaled by 1/(1-p). Eval mode is the identity.
template <typename T>
Tensor<T> dropout(Tape<T>& tape, const Tensor<T>& x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  if (mode == Mode::eval || p == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(x.numel());
  for (auto& m : mask) m = keep(rng) ? scale : T(0);
  Tensor<T> out = Tensor<T>::zeros(x.shape());
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < mask.size(); ++i) ov[i] = xv[i] * mask[i];
  if (!tape.wants_grad({&x})) return out;
  auto xn = x.node_ptr();
  auto on = out.node_ptr();
  tape.record("dropout", {&x}, out, [xn, on, mask = std::move(mask)]() {
    auto& gx = xn->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += on->grad[i] * mask[i];
  });
  return out;
}

// ---------------------------------------------------------------------------
// Linear

/// y = x . weight + bias with weight (in x out).
template <typename T>
struct LinearParams {
  Tensor<T> weight;
  Tensor<T> bias;

  static LinearParams he(std::size_t in, std::size_t out, Rng& rng) {
    const Shape ws{in, out};
    return {Tensor<T>(ws, init_params<T>(ws, in, rng), true), Tensor<T>::zeros({out}, true)};
  }
  static LinearParams zeros(std::size_t in, std::size_t out) {
    return {Tensor<T>::zeros({in, out}, true), Tensor<T>::zeros({out}, true)};
  }
};

template <typename T>
Tensor<T> linear(Tape<T>& tape, const Tensor<T>& x, const LinearParams<T>& p) {
  return add(tape, matmul(tape, x, p.weight), p.bias);
}

}  // namespace aicrn

#endif  // AICRN_LAYERS_HPP_
