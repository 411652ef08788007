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

#ifndef AICRN_NETWORK_HPP_
#define AICRN_NETWORK_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aicrn/cbam.hpp"
#include "aicrn/error.hpp"
#include "aicrn/layers.hpp"
#include "aicrn/ops.hpp"
#include "aicrn/tensor.hpp"

namespace aicrn {

/// Architecture hyperparameters. Defaults describe the full-size network
/// (8 leads, 10 s at 100 Hz, 64 filters, eight attention residual modules).
struct AicrnConfig {
  std::size_t in_channels = 8;
  std::size_t input_len = 1000;
  std::size_t stem_width = 64;
  std::size_t stem_kernel = 15;
  std::size_t block_kernel = 7;
  std::size_t num_blocks = 8;
  bool attention = true;
  std::size_t cbam_ratio = 8;
  std::size_t spatial_kernel = 7;
  std::size_t pool_kernel = 2;
  double dropout_p = 0.5;
  std::size_t out_size = 1;
  double leaky_slope = 0.1;
  bool post_activation = true;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  // Fixed output transform y = scale * head + shift. Identity unless targets
  // are standardized, in which case it carries the training-target std/mean.
  double output_scale = 1.0;
  double output_shift = 0.0;

  /// Throws ConfigError naming every offending field.
  void validate() const {
    std::vector<std::string> bad;
    if (in_channels < 1) bad.push_back("in_channels must be >= 1");
    if (stem_width < 1) bad.push_back("stem_width must be >= 1");
    if (stem_kernel % 2 == 0) bad.push_back("stem_kernel must be odd");
    if (block_kernel % 2 == 0) bad.push_back("block_kernel must be odd");
    if (spatial_kernel % 2 == 0) bad.push_back("spatial_kernel must be odd");
    if (num_blocks < 1) bad.push_back("num_blocks must be >= 1");
    if (pool_kernel < 1) bad.push_back("pool_kernel must be >= 1");
    if (input_len < pool_kernel) bad.push_back("input_len must be >= pool_kernel");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) bad.push_back("dropout_p must lie in [0, 1)");
    if (out_size != 1) bad.push_back("out_size must be 1");
    if (attention && (cbam_ratio < 1 || stem_width % cbam_ratio != 0)) {
      bad.push_back("cbam_ratio must divide stem_width");
    }
    if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) bad.push_back("bn_momentum must lie in (0, 1)");
    if (!(bn_epsilon > 0.0)) bad.push_back("bn_epsilon must be positive");
    if (!(output_scale > 0.0)) bad.push_back("output_scale must be positive");
    if (!bad.empty()) {
      std::string msg = "invalid AicrnConfig:";
      for (const auto& b : bad) msg += " " + b + ";";
      throw ConfigError(msg);
    }
  }

  friend bool operator==(const AicrnConfig&, const AicrnConfig&) = default;
};

inline void to_json(nlohmann::json& j, const AicrnConfig& c) {
  j = nlohmann::json{{"in_channels", c.in_channels},
                     {"input_len", c.input_len},
                     {"stem_width", c.stem_width},
                     {"stem_kernel", c.stem_kernel},
                     {"block_kernel", c.block_kernel},
                     {"num_blocks", c.num_blocks},
                     {"attention", c.attention},
                     {"cbam_ratio", c.cbam_ratio},
                     {"spatial_kernel", c.spatial_kernel},
                     {"pool_kernel", c.pool_kernel},
                     {"dropout_p", c.dropout_p},
                     {"out_size", c.out_size},
                     {"leaky_slope", c.leaky_slope},
                     {"post_activation", c.post_activation},
                     {"bn_momentum", c.bn_momentum},
                     {"bn_epsilon", c.bn_epsilon},
                     {"output_scale", c.output_scale},
                     {"output_shift", c.output_shift}};
}

inline void from_json(const nlohmann::json& j, AicrnConfig& c) {
  j.at("in_channels").get_to(c.in_channels);
  j.at("input_len").get_to(c.input_len);
  j.at("stem_width").get_to(c.stem_width);
  j.at("stem_kernel").get_to(c.stem_kernel);
  j.at("block_kernel").get_to(c.block_kernel);
  j.at("num_blocks").get_to(c.num_blocks);
  j.at("attention").get_to(c.attention);
  j.at("cbam_ratio").get_to(c.cbam_ratio);
  j.at("spatial_kernel").get_to(c.spatial_kernel);
  j.at("pool_kernel").get_to(c.pool_kernel);
  j.at("dropout_p").get_to(c.dropout_p);
  j.at("out_size").get_to(c.out_size);
  j.at("leaky_slope").get_to(c.leaky_slope);
  j.at("post_activation").get_to(c.post_activation);
  j.at("bn_momentum").get_to(c.bn_momentum);
  j.at("bn_epsilon").get_to(c.bn_epsilon);
  j.at("output_scale").get_to(c.output_scale);
  j.at("output_shift").get_to(c.output_shift);
}

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
  bool trainable = true;
};

template <typename T>
struct StemStage {
  Conv1dParams<T> conv;
  BatchNorm1dParams<T> bn;
};

/// Two conv/BN stages plus optional CBAM on the branch; the shortcut is the
/// identity, so input and output shapes match.
template <typename T>
struct ResidualAttentionModule {
  Conv1dParams<T> conv_a;
  BatchNorm1dParams<T> bn_a;
  Conv1dParams<T> conv_b;
  BatchNorm1dParams<T> bn_b;
  std::optional<CbamParams<T>> cbam;

  std::size_t width() const { return conv_a.out_channels(); }

  static ResidualAttentionModule make(const AicrnConfig& c, Rng& rng) {
    const std::size_t w = c.stem_width;
    ResidualAttentionModule m{Conv1dParams<T>::he(w, w, c.block_kernel, rng),
                              BatchNorm1dParams<T>::make(w, c.bn_momentum, c.bn_epsilon),
                              Conv1dParams<T>::he(w, w, c.block_kernel, rng),
                              BatchNorm1dParams<T>::make(w, c.bn_momentum, c.bn_epsilon),
                              std::nullopt};
    if (c.attention) {
      m.cbam = CbamParams<T>{ChannelAttentionParams<T>::he(w, c.cbam_ratio, rng),
                             SpatialAttentionParams<T>::he(c.spatial_kernel, rng)};
    }
    return m;
  }
};

namespace detail {

template <typename T, typename Fn>
void visit_conv(const std::string& prefix, Conv1dParams<T>& p, Fn&& fn) {
  fn(prefix + ".weight", p.weight, true);
  fn(prefix + ".bias", p.bias, true);
}

template <typename T, typename Fn>
void visit_bn(const std::string& prefix, BatchNorm1dParams<T>& p, Fn&& fn) {
  fn(prefix + ".gamma", p.gamma, true);
  fn(prefix + ".beta", p.beta, true);
  fn(prefix + ".running_mean", p.running_mean, false);
  fn(prefix + ".running_var", p.running_var, false);
}

}  // namespace detail

template <typename T>
class AicrnModel {
 public:
  AicrnConfig config;
  std::array<StemStage<T>, 2> stem;
  std::vector<ResidualAttentionModule<T>> blocks;
  LinearParams<T> head;

  /// Visits every tensor (parameters and running statistics) in a fixed
  /// order: fn(name, tensor, trainable).
  template <typename Fn>
  void visit(Fn&& fn) {
    for (std::size_t i = 0; i < stem.size(); ++i) {
      const std::string p = "stem." + std::to_string(i);
      detail::visit_conv(p + ".conv", stem[i].conv, fn);
      detail::visit_bn(p + ".bn", stem[i].bn, fn);
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "blocks." + std::to_string(i);
      auto& m = blocks[i];
      detail::visit_conv(p + ".conv_a", m.conv_a, fn);
      detail::visit_bn(p + ".bn_a", m.bn_a, fn);
      detail::visit_conv(p + ".conv_b", m.conv_b, fn);
      detail::visit_bn(p + ".bn_b", m.bn_b, fn);
      if (m.cbam) {
        fn(p + ".cbam.channel.w1", m.cbam->channel.w1, true);
        fn(p + ".cbam.channel.b1", m.cbam->channel.b1, true);
        fn(p + ".cbam.channel.w2", m.cbam->channel.w2, true);
        fn(p + ".cbam.channel.b2", m.cbam->channel.b2, true);
        detail::visit_conv(p + ".cbam.spatial", m.cbam->spatial.conv, fn);
      }
    }
    fn(std::string("head.weight"), head.weight, true);
    fn(std::string("head.bias"), head.bias, true);
  }

  /// All tensors in checkpoint order; handles share storage with the model.
  std::vector<NamedTensor<T>> state() {
    std::vector<NamedTensor<T>> out;
    visit([&](const std::string& n, Tensor<T>& t, bool trainable) { out.push_back({n, t, trainable}); });
    return out;
  }

  std::vector<NamedTensor<T>> parameters() {
    std::vector<NamedTensor<T>> out;
    visit([&](const std::string& n, Tensor<T>& t, bool trainable) {
      if (trainable) out.push_back({n, t, true});
    });
    return out;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.tensor.numel();
    return n;
  }

  void zero_grad() {
    visit([](const std::string&, Tensor<T>& t, bool) { t.zero_grad(); });
  }

  AicrnModel clone() const {
    AicrnModel copy = *this;
    copy.visit([](const std::string&, Tensor<T>& t, bool) { t = t.clone(); });
    return copy;
  }
};

template <typename T>
AicrnModel<T> build(const AicrnConfig& config, Rng& rng) {
  config.validate();
  const std::size_t w = config.stem_width;
  AicrnModel<T> m;
  m.config = config;
  m.stem[0] = {Conv1dParams<T>::he(w, config.in_channels, config.stem_kernel, rng),
               BatchNorm1dParams<T>::make(w, config.bn_momentum, config.bn_epsilon)};
  m.stem[1] = {Conv1dParams<T>::he(w, w, config.stem_kernel, rng),
               BatchNorm1dParams<T>::make(w, config.bn_momentum, config.bn_epsilon)};
  for (std::size_t i = 0; i < config.num_blocks; ++i) {
    m.blocks.push_back(ResidualAttentionModule<T>::make(config, rng));
  }
  m.head = LinearParams<T>::he(w, config.out_size, rng);
  return m;
}

/// H(X) = act(X + G(X)) with G = [CBAM] . bn_b . conv_b . leaky . bn_a . conv_a.
template <typename T>
Tensor<T> residual_forward(Tape<T>& tape, const Tensor<T>& x, ResidualAttentionModule<T>& m, Mode mode,
                           T slope = T(0.1), bool post_activation = true) {
  if (x.shape().rank() != 3 || x.dim(1) != m.width()) {
    throw DimensionError("residual module of width " + std::to_string(m.width()) + " got input " + x.shape().str());
  }
  auto h = batchnorm1d(tape, conv1d(tape, x, m.conv_a), m.bn_a, mode);
  h = leaky_relu(tape, h, slope);
  h = batchnorm1d(tape, conv1d(tape, h, m.conv_b), m.bn_b, mode);
  if (m.cbam) h = apply_cbam(tape, h, *m.cbam);
  auto out = add(tape, x, h);
  return post_activation ? leaky_relu(tape, out, slope) : out;
}

/// (B x in_channels x input_len) -> (B x 1). `rng` drives dropout in train mode.
template <typename T>
Tensor<T> forward(Tape<T>& tape, AicrnModel<T>& model, const Tensor<T>& x, Mode mode, Rng& rng) {
  const auto& c = model.config;
  if (x.shape().rank() != 3 || x.dim(1) != c.in_channels || x.dim(2) != c.input_len) {
    throw DimensionError("model expects input (B x " + std::to_string(c.in_channels) + " x " +
                         std::to_string(c.input_len) + "), got " + x.shape().str());
  }
  const T slope = static_cast<T>(c.leaky_slope);
  Tensor<T> h = x;
  for (auto& stage : model.stem) {
    h = leaky_relu(tape, batchnorm1d(tape, conv1d(tape, h, stage.conv), stage.bn, mode), slope);
  }
  h = avg_pool1d(tape, h, c.pool_kernel);
  for (auto& block : model.blocks) h = residual_forward(tape, h, block, mode, slope, c.post_activation);
  h = dropout(tape, h, c.dropout_p, mode, rng);
  h = global_avg_pool(tape, h);
  h = reshape(tape, h, Shape{x.dim(0), c.stem_width});
  h = linear(tape, h, model.head);
  if (c.output_scale != 1.0 || c.output_shift != 0.0) {
    h = affine(tape, h, static_cast<T>(c.output_scale), static_cast<T>(c.output_shift));
  }
  return h;
}

}  // namespace aicrn

#endif  // AICRN_NETWORK_HPP_
