// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dsfgan {

// Each error family maps to one CLI exit code (see tools/commands.hpp).

/// Invalid configuration: unknown column, bad flag value, malformed config/model file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unusable input data: missing file, zero rows after cleaning, unseen category.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape violations and misuse of the gradient tape.
class ShapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A forward value became NaN or infinite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training aborted on a non-finite loss; carries the 1-based epoch.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, int epoch)
      : NumericError(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// A cross-validation fold failed inside an experiment.
class ExperimentError : public std::runtime_error {
 public:
  ExperimentError(const std::string& what, int fold)
      : std::runtime_error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
  int fold() const noexcept { return fold_; }

 private:
  int fold_;
};

}  // namespace dsfgan
