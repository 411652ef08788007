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

#ifndef AICRN_OPTIM_HPP_
#define AICRN_OPTIM_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aicrn/error.hpp"
#include "aicrn/network.hpp"
#include "aicrn/tensor.hpp"

namespace aicrn {

/// Adam with a Nesterov look-ahead on the first moment.
struct NadamOptions {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct NadamState {
  NadamOptions options;
  std::uint64_t t = 0;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;

  NadamState() = default;
  explicit NadamState(NadamOptions opts) : options(opts) {}
};

/// One update of every parameter from its accumulated gradient:
///
///   t <- t + 1
///   m <- b1 m + (1 - b1) g          v <- b2 v + (1 - b2) g^2
///   m_hat = m / (1 - b1^(t+1))      g_hat = g / (1 - b1^t)
///   v_hat = v / (1 - b2^t)
///   theta <- theta - lr (b1 m_hat + (1 - b1) g_hat) / (sqrt(v_hat) + eps)
///
/// Throws NonFiniteError naming the parameter if any gradient is NaN/Inf;
/// in that case no parameter is modified.
template <typename T>
void nadam_step(std::span<const NamedTensor<T>> params, NadamState<T>& s) {
  if (s.m.empty()) {
    for (const auto& p : params) {
      s.m.emplace_back(p.tensor.numel(), T(0));
      s.v.emplace_back(p.tensor.numel(), T(0));
    }
  }
  if (s.m.size() != params.size()) throw ContractError("nadam_step: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (s.m[i].size() != params[i].tensor.numel()) {
      throw DimensionError("nadam_step: state for '" + params[i].name + "' has the wrong size");
    }
    for (T g : params[i].tensor.grad()) {
      if (!std::isfinite(g)) throw NonFiniteError("non-finite gradient in parameter '" + params[i].name + "'");
    }
  }

  const auto& o = s.options;
  s.t += 1;
  const double t = static_cast<double>(s.t);
  const double m_corr = 1.0 - std::pow(o.beta1, t + 1.0);
  const double g_corr = 1.0 - std::pow(o.beta1, t);
  const double v_corr = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T> theta = params[i].tensor;
    auto w = theta.data();
    // A parameter the loss never reached has no gradient buffer; treat it as zero.
    const auto g = theta.has_grad() ? theta.grad() : std::span<const T>();
    auto& m = s.m[i];
    auto& v = s.v[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g.empty() ? 0.0 : static_cast<double>(g[k]);
      const double mk = o.beta1 * m[k] + (1.0 - o.beta1) * gk;
      const double vk = o.beta2 * v[k] + (1.0 - o.beta2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double m_hat = mk / m_corr;
      const double g_hat = gk / g_corr;
      const double v_hat = vk / v_corr;
      const double step = o.lr * (o.beta1 * m_hat + (1.0 - o.beta1) * g_hat) / (std::sqrt(v_hat) + o.epsilon);
      w[k] = static_cast<T>(static_cast<double>(w[k]) - step);
    }
  }
}

template <typename T>
void nadam_step(const std::vector<NamedTensor<T>>& params, NadamState<T>& s) {
  nadam_step(std::span<const NamedTensor<T>>(params), s);
}

}  // namespace aicrn

#endif  // AICRN_OPTIM_HPP_
