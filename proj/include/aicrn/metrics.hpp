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

#ifndef AICRN_METRICS_HPP_
#define AICRN_METRICS_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "aicrn/error.hpp"

namespace aicrn {

struct RegressionMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> r2;  // empty when the targets have zero variance

  /// R^2, or MetricError when it is undefined.
  double r2_value() const {
    if (!r2) throw MetricError("r2 undefined: target variance is zero");
    return *r2;
  }
};

/// MAE, RMSE and the coefficient of determination 1 - SS_res / SS_tot.
inline RegressionMetrics compute_metrics(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw DimensionError("compute_metrics: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(target.size()) + " targets");
  }
  if (target.empty()) throw DimensionError("compute_metrics: empty input");
  const double n = static_cast<double>(target.size());
  double abs_sum = 0.0, sq_sum = 0.0, t_sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = pred[i] - target[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    t_sum += target[i];
  }
  const double mean = t_sum / n;
  double ss_tot = 0.0;
  for (double t : target) ss_tot += (t - mean) * (t - mean);

  RegressionMetrics m;
  m.mae = abs_sum / n;
  m.rmse = std::sqrt(sq_sum / n);
  if (ss_tot > 0.0) m.r2 = 1.0 - sq_sum / ss_tot;
  return m;
}

}  // namespace aicrn

#endif  // AICRN_METRICS_HPP_
