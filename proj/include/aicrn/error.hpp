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

#ifndef AICRN_ERROR_HPP_
#define AICRN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace aicrn {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand extents disagree (channel counts, inner matmul extents, input shapes).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes cannot be broadcast against each other.
class BroadcastError : public DimensionError {
 public:
  using DimensionError::DimensionError;
};

/// Axis or index outside the valid range for a tensor's rank.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. calling backward on a non-scalar.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Batch statistics cannot be formed (single value per channel in training).
class DegenerateStatisticsError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared where finite values are required.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class CorruptCheckpointError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incomplete ECG input data.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Metric that is undefined for the given data (R^2 on constant targets).
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Failure inside the training loop; the message carries the epoch.
class TrainingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace aicrn

#endif  // AICRN_ERROR_HPP_
