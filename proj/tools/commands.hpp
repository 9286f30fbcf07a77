// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Subcommands of the dsfgan tool. Each returns a process exit code.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace dsfgan::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
  kFoldFailure = 5,
};

/// Effective settings of one invocation. Precedence, lowest first: preset,
/// config file, command-line flags.
struct RunConfig {
  std::string preset = "adult";
  std::string data;         // CSV path
  std::string schema;       // schema config path
  std::string prepared;     // fitted schema; defaults to <out>/schema.json
  std::string model;        // model file for `sample`
  std::string out = "out";  // output directory
  std::string variant = "feedback";  // base | feedback | paired
  int epochs = 100;
  std::size_t batch = 500;
  double lambda = 1.0;
  std::size_t folds = 5;
  std::size_t reps = 5;
  std::size_t n = 0;  // rows for `sample`; 0 means "not given"
  std::size_t jobs = 1;
  std::uint64_t seed = 0;

  /// Epochs, batch and lambda of a named preset: adult 100/500/1, house 500/200/1.
  void apply_preset(const std::string& name);
  /// Applies keys present in `j`; "preset" is applied first.
  void merge(const nlohmann::json& j);
  nlohmann::json to_json() const;
  std::string prepared_path() const;
};

/// Flag values; unset ones leave the config untouched.
struct Overrides {
  std::optional<std::string> preset, data, schema, prepared, model, out, variant;
  std::optional<int> epochs;
  std::optional<std::size_t> batch, folds, reps, n, jobs;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
};

/// preset -> config file -> flags. Throws ConfigError on unreadable files,
/// unknown presets or variants, and out-of-range values.
RunConfig resolve_config(const std::optional<std::string>& config_path, const Overrides& flags);

int cmd_prepare(const RunConfig& config, std::ostream& log);
int cmd_train(const RunConfig& config, std::ostream& log);
int cmd_sample(const RunConfig& config, std::ostream& log);
int cmd_experiment(const RunConfig& config, std::ostream& log);

/// Runs `body`, mapping library exceptions to exit codes and printing the
/// message to `err`.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace dsfgan::cli
