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

#ifndef AICRN_LOSS_HPP_
#define AICRN_LOSS_HPP_

#include <cstddef>

#include "aicrn/error.hpp"
#include "aicrn/ops.hpp"
#include "aicrn/tensor.hpp"

namespace aicrn {

/// Mean of squared differences; scalar (rank-0) result.
template <typename T>
Tensor<T> mse_loss(Tape<T>& tape, const Tensor<T>& pred, const Tensor<T>& target) {
  if (!(pred.shape() == target.shape())) {
    throw DimensionError("mse_loss shape mismatch: " + pred.shape().str() + " vs " + target.shape().str());
  }
  if (pred.numel() == 0) throw DimensionError("mse_loss on empty batch");
  auto pv = pred.data();
  auto tv = target.data();
  T s = 0;
  for (std::size_t i = 0; i < pv.size(); ++i) s += (pv[i] - tv[i]) * (pv[i] - tv[i]);
  const T n = static_cast<T>(pv.size());
  Tensor<T> out(Shape{}, {s / n});
  if (!tape.wants_grad({&pred, &target})) {
    tape.validate("mse_loss", out);
    return out;
  }
  auto pn = pred.node_ptr();
  auto tn = target.node_ptr();
  auto on = out.node_ptr();
  tape.record("mse_loss", {&pred, &target}, out, [pn, tn, on, n]() {
    const T g = on->grad[0] * T(2) / n;
    for (std::size_t i = 0; i < pn->value.size(); ++i) {
      const T d = g * (pn->value[i] - tn->value[i]);
      if (pn->requires_grad) pn->ensure_grad()[i] += d;
      if (tn->requires_grad) tn->ensure_grad()[i] -= d;
    }
  });
  return out;
}

}  // namespace aicrn

#endif  // AICRN_LOSS_HPP_
