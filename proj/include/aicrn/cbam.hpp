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

// Convolutional block attention over 1-D feature maps (B x C x L).
//
//   channel gate  M_c = sigmoid(MLP(mean_t F) + MLP(max_t F))      (B x C x 1)
//   spatial gate  M_s = sigmoid(conv_k([mean_c F ; max_c F]))      (B x 1 x L)
//   F'  = M_c * F
//   F'' = M_s(F') * F'
//
// The MLP is C -> C/r -> C with a ReLU hidden layer and one weight set
// shared by both pooled descriptors.

#ifndef AICRN_CBAM_HPP_
#define AICRN_CBAM_HPP_

#include <cstddef>
#include <string>

#include "aicrn/error.hpp"
#include "aicrn/layers.hpp"
#include "aicrn/ops.hpp"
#include "aicrn/tensor.hpp"

namespace aicrn {

template <typename T>
struct ChannelAttentionParams {
  Tensor<T> w1;  // C x C/r
  Tensor<T> b1;  // C/r
  Tensor<T> w2;  // C/r x C
  Tensor<T> b2;  // C
  std::size_t ratio = 8;

  std::size_t channels() const { return w1.dim(0); }
  std::size_t hidden() const { return w1.dim(1); }

  static std::size_t hidden_width(std::size_t channels, std::size_t ratio) {
    if (ratio < 1) throw ConfigError("cbam reduction ratio must be >= 1");
    if (channels % ratio != 0) {
      throw ConfigError("cbam: channels (" + std::to_string(channels) + ") not divisible by reduction ratio (" +
                        std::to_string(ratio) + ")");
    }
    return channels / ratio;
  }

  static ChannelAttentionParams he(std::size_t channels, std::size_t ratio, Rng& rng) {
    const std::size_t h = hidden_width(channels, ratio);
    const Shape s1{channels, h}, s2{h, channels};
    return {Tensor<T>(s1, init_params<T>(s1, channels, rng), true), Tensor<T>::zeros({h}, true),
            Tensor<T>(s2, init_params<T>(s2, h, rng), true), Tensor<T>::zeros({channels}, true), ratio};
  }

  static ChannelAttentionParams zeros(std::size_t channels, std::size_t ratio) {
    const std::size_t h = hidden_width(channels, ratio);
    return {Tensor<T>::zeros({channels, h}, true), Tensor<T>::zeros({h}, true), Tensor<T>::zeros({h, channels}, true),
            Tensor<T>::zeros({channels}, true), ratio};
  }
};

template <typename T>
struct SpatialAttentionParams {
  Conv1dParams<T> conv;  // 1 x 2 x k

  static SpatialAttentionParams he(std::size_t k, Rng& rng) { return {Conv1dParams<T>::he(1, 2, k, rng)}; }
  static SpatialAttentionParams zeros(std::size_t k) { return {Conv1dParams<T>::zeros(1, 2, k)}; }
};

template <typename T>
struct CbamParams {
  ChannelAttentionParams<T> channel;
  SpatialAttentionParams<T> spatial;
};

/// Channel gate M_c in (0,1), shape (B x C x 1).
template <typename T>
Tensor<T> channel_attention(Tape<T>& tape, const Tensor<T>& f, const ChannelAttentionParams<T>& p) {
  if (f.shape().rank() != 3) throw DimensionError("channel_attention input must be (B x C x L), got " + f.shape().str());
  const std::size_t batch = f.dim(0), ch = f.dim(1);
  if (ch != p.channels()) {
    throw DimensionError("channel_attention: input has " + std::to_string(ch) + " channels, params expect " +
                         std::to_string(p.channels()));
  }
  auto mlp = [&](const Tensor<T>& z) {
    auto h = relu(tape, add(tape, matmul(tape, z, p.w1), p.b1));
    return add(tape, matmul(tape, h, p.w2), p.b2);
  };
  auto avg = reshape(tape, reduce(tape, f, 2, ReduceKind::mean), Shape{batch, ch});
  auto mx = reshape(tape, reduce(tape, f, 2, ReduceKind::max), Shape{batch, ch});
  auto gate = sigmoid(tape, add(tape, mlp(avg), mlp(mx)));
  return reshape(tape, gate, Shape{batch, ch, 1});
}

/// Spatial gate M_s in (0,1), shape (B x 1 x L).
template <typename T>
Tensor<T> spatial_attention(Tape<T>& tape, const Tensor<T>& f, const SpatialAttentionParams<T>& p) {
  if (f.shape().rank() != 3) throw DimensionError("spatial_attention input must be (B x C x L), got " + f.shape().str());
  auto avg = reduce(tape, f, 1, ReduceKind::mean);
  auto mx = reduce(tape, f, 1, ReduceKind::max);
  return sigmoid(tape, conv1d(tape, concat(tape, avg, mx, 1), p.conv));
}

/// Channel refinement followed by spatial refinement; the order is fixed.
template <typename T>
Tensor<T> apply_cbam(Tape<T>& tape, const Tensor<T>& f, const ChannelAttentionParams<T>& cp,
                     const SpatialAttentionParams<T>& sp) {
  auto refined = mul(tape, f, channel_attention(tape, f, cp));
  return mul(tape, refined, spatial_attention(tape, refined, sp));
}

template <typename T>
Tensor<T> apply_cbam(Tape<T>& tape, const Tensor<T>& f, const CbamParams<T>& p) {
  return apply_cbam(tape, f, p.channel, p.spatial);
}

}  // namespace aicrn

#endif  // AICRN_CBAM_HPP_
