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

// Epoch loop with validation-driven early stopping.
//
// Each epoch shuffles the training set with a (seed, epoch) permutation, takes
// one Nadam step per minibatch, then scores the full validation set in eval
// mode. Every improvement is persisted; training ends at max_epochs or when
// the early-stop counter exceeds the patience, and the model is left holding
// the best weights seen.

#ifndef AICRN_TRAIN_HPP_
#define AICRN_TRAIN_HPP_

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "aicrn/checkpoint.hpp"
#include "aicrn/data.hpp"
#include "aicrn/early_stopping.hpp"
#include "aicrn/error.hpp"
#include "aicrn/loss.hpp"
#include "aicrn/metrics.hpp"
#include "aicrn/network.hpp"
#include "aicrn/optim.hpp"

namespace aicrn {

struct TrainConfig {
  std::size_t max_epochs = 1000;
  std::size_t batch_size = 300;
  std::size_t eval_batch_size = 300;
  std::uint64_t seed = 0;
  Target target = Target::hr;
  std::filesystem::path checkpoint_path;  // empty: best weights kept in memory only
  std::filesystem::path history_path;     // empty: no CSV history
  std::size_t patience = 20;
  double min_delta = 0.0;
  NadamOptions optimizer;

  void validate() const {
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (batch normalization needs two samples)");
    if (eval_batch_size < 1) throw ConfigError("eval_batch_size must be >= 1");
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(min_delta >= 0.0)) throw ConfigError("min_delta must be >= 0");
    if (!(optimizer.lr > 0.0)) throw ConfigError("learning rate must be positive");
  }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
  StopDecision decision = StopDecision::proceed;
};

struct TrainRun {
  std::vector<EpochRecord> history;
  double best_val_mse = 0.0;
  std::size_t best_epoch = 0;
  std::size_t checkpoint_writes = 0;
  std::filesystem::path checkpoint_path;
  bool stopped_early = false;
  RegressionMetrics train_metrics;  // best model, eval mode
  RegressionMetrics val_metrics;
  double seconds = 0.0;
};

/// Eval-mode predictions in record order.
template <typename T>
std::vector<double> predict(AicrnModel<T>& model, const std::vector<EcgRecord>& records, std::size_t batch_size = 256) {
  std::vector<double> out;
  out.reserve(records.size());
  Rng unused(0);
  const auto& c = model.config;
  for (const auto& b : ordered_batches<T>(records, std::nullopt, batch_size, c.in_channels, c.input_len)) {
    auto tape = Tape<T>::inference();
    auto y = forward(tape, model, b.x, Mode::eval, unused);
    for (T v : y.data()) out.push_back(static_cast<double>(v));
  }
  return out;
}

inline std::vector<double> labels_of(const std::vector<EcgRecord>& records, Target target) {
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) {
    const auto v = r.label(target);
    if (!v) throw IngestionError("record " + r.id + " lacks label " + std::string(target_name(target)));
    y.push_back(*v);
  }
  return y;
}

template <typename T>
RegressionMetrics evaluate(AicrnModel<T>& model, const std::vector<EcgRecord>& records, Target target,
                           std::size_t batch_size = 256) {
  const auto y = labels_of(records, target);
  const auto p = predict(model, records, batch_size);
  return compute_metrics(p, y);
}

inline double mean_squared_error(const std::vector<double>& pred, const std::vector<double>& target) {
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

/// Sets the model's fixed output affine to the training labels' mean and
/// standard deviation so the network regresses a unit-scale quantity.
inline void standardize_output(AicrnConfig& config, const std::vector<EcgRecord>& train, Target target) {
  const auto y = labels_of(train, target);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(y.size()));
  config.output_shift = mean;
  config.output_scale = sd > 0.0 ? sd : 1.0;
}

namespace detail {

inline std::string format_epoch_line(const EpochRecord& e, double best, std::size_t counter) {
  return "epoch=" + std::to_string(e.epoch) + " train_mse=" + format_exact(e.train_mse) +
         " val_mse=" + format_exact(e.val_mse) + " best=" + format_exact(best) + " counter=" + std::to_string(counter);
}

inline void check_fit_inputs(const std::vector<EcgRecord>& train, const std::vector<EcgRecord>& val,
                             const AicrnConfig& c, Target target) {
  if (train.size() < 2) throw ContractError("training set needs at least 2 records");
  if (val.empty()) throw ContractError("validation set is empty");
  std::set<std::string> ids;
  for (const auto& r : train) ids.insert(r.id);
  for (const auto& r : val) {
    if (ids.count(r.id) && &train != &val) throw ContractError("record " + r.id + " is in both train and validation sets");
  }
  for (const auto* set : {&train, &val}) {
    for (const auto& r : *set) {
      if (r.n_leads() != c.in_channels || r.length != c.input_len) {
        throw DimensionError("record " + r.id + " is " + std::to_string(r.n_leads()) + " x " +
                             std::to_string(r.length) + ", model expects " + std::to_string(c.in_channels) + " x " +
                             std::to_string(c.input_len));
      }
      if (!r.label(target)) throw IngestionError("record " + r.id + " lacks label " + std::string(target_name(target)));
    }
  }
}

}  // namespace detail

/// Trains `model` in place. Passing the same vector as `train` and `val` is
/// allowed (overfit checks); otherwise the sets must not share record ids.
template <typename T>
TrainRun fit(AicrnModel<T>& model, const std::vector<EcgRecord>& train, const std::vector<EcgRecord>& val,
             const TrainConfig& tc, std::ostream* log = nullptr) {
  tc.validate();
  detail::check_fit_inputs(train, val, model.config, tc.target);
  const auto start = std::chrono::steady_clock::now();
  const auto& c = model.config;

  std::ofstream history;
  if (!tc.history_path.empty()) {
    history.open(tc.history_path, std::ios::trunc);
    if (!history) throw TrainingError("cannot open history file " + tc.history_path.string());
    history << "epoch,train_mse,val_mse\n";
  }

  const auto val_y = labels_of(val, tc.target);
  NadamState<T> opt(tc.optimizer);
  EarlyStopState stop(tc.patience, tc.min_delta);
  auto params = model.parameters();
  std::seed_seq dropout_seed{static_cast<std::uint32_t>(tc.seed), static_cast<std::uint32_t>(tc.seed >> 32), 0xD0u};
  Rng dropout_rng(dropout_seed);

  TrainRun run;
  run.checkpoint_path = tc.checkpoint_path;
  std::optional<AicrnModel<T>> best;

  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    double sq_sum = 0.0;
    std::size_t seen = 0;
    for (auto& b : batches<T>(train, tc.target, tc.batch_size, tc.seed, epoch, c.in_channels, c.input_len)) {
      model.zero_grad();
      Tape<T> tape;
      auto pred = forward(tape, model, b.x, Mode::train, dropout_rng);
      auto loss = mse_loss(tape, pred, b.y);
      const double l = static_cast<double>(loss.item());
      if (!std::isfinite(l)) throw TrainingError("epoch " + std::to_string(epoch) + ": non-finite training loss");
      tape.backward(loss);
      try {
        nadam_step(params, opt);
      } catch (const NonFiniteError& e) {
        throw TrainingError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
      sq_sum += l * static_cast<double>(b.indices.size());
      seen += b.indices.size();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = sq_sum / static_cast<double>(seen);
    rec.val_mse = mean_squared_error(predict(model, val, tc.eval_batch_size), val_y);
    if (!std::isfinite(rec.val_mse)) {
      throw TrainingError("epoch " + std::to_string(epoch) + ": non-finite validation loss");
    }
    rec.decision = stop.observe(rec.val_mse);
    if (rec.decision == StopDecision::improved) {
      run.best_epoch = epoch;
      run.best_val_mse = rec.val_mse;
      if (!tc.checkpoint_path.empty()) {
        try {
          save_weights(model, tc.checkpoint_path);
        } catch (const IoError& e) {
          throw TrainingError("epoch " + std::to_string(epoch) + ": " + e.what());
        }
      }
      best = model.clone();
      ++run.checkpoint_writes;
    }
    run.history.push_back(rec);
    if (log) *log << detail::format_epoch_line(rec, stop.best_loss(), stop.counter) << '\n' << std::flush;
    if (history.is_open()) {
      history << epoch << ',' << format_exact(rec.train_mse) << ',' << format_exact(rec.val_mse) << '\n';
      history.flush();
    }
    if (rec.decision == StopDecision::stop) {
      run.stopped_early = true;
      break;
    }
  }

  if (!tc.checkpoint_path.empty()) {
    model = load_weights<T>(tc.checkpoint_path, model.config);
  } else {
    model = std::move(*best);
  }
  run.train_metrics = evaluate(model, train, tc.target, tc.eval_batch_size);
  run.val_metrics = evaluate(model, val, tc.target, tc.eval_batch_size);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

}  // namespace aicrn

#endif  // AICRN_TRAIN_HPP_
