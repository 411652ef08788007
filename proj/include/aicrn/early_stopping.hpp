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

#ifndef AICRN_EARLY_STOPPING_HPP_
#define AICRN_EARLY_STOPPING_HPP_

#include <cstddef>
#include <limits>

namespace aicrn {

enum class StopDecision { improved, proceed, stop };

/// Patience counter over validation scores, where score = -validation loss.
/// An observation improves only if it beats the best score by more than
/// min_delta; ties count against patience.
struct EarlyStopState {
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t counter = 0;
  std::size_t patience = 20;
  double min_delta = 0.0;

  EarlyStopState() = default;
  EarlyStopState(std::size_t patience_, double min_delta_ = 0.0) : patience(patience_), min_delta(min_delta_) {}

  StopDecision observe(double val_loss) {
    const double score = -val_loss;
    if (score > best_score + min_delta) {
      best_score = score;
      counter = 0;
      return StopDecision::improved;
    }
    ++counter;
    return counter > patience ? StopDecision::stop : StopDecision::proceed;
  }

  double best_loss() const { return -best_score; }
};

}  // namespace aicrn

#endif  // AICRN_EARLY_STOPPING_HPP_
