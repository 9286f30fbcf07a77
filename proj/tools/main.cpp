// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0
//
// dsfgan prepare|train|sample|experiment [flags]

#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

namespace {

using dsfgan::cli::Overrides;

void add_common_flags(CLI::App& cmd, std::optional<std::string>& config, Overrides& o) {
  cmd.add_option("--config", config, "JSON run config; flags override its values");
  cmd.add_option("--preset", o.preset, "Training defaults: adult (100/500/1) or house (500/200/1)");
  cmd.add_option("--data", o.data, "Input CSV with a header row");
  cmd.add_option("--schema", o.schema, "Schema config JSON");
  cmd.add_option("--prepared", o.prepared, "Fitted schema (default <out>/schema.json)");
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_option("--seed", o.seed, "Root seed");
}

void add_training_flags(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--epochs", o.epochs, "Training epochs N");
  cmd.add_option("--batch", o.batch, "Batch size");
  cmd.add_option("--lambda", o.lambda, "Feedback weight");
  cmd.add_option("--variant", o.variant, "base | feedback | paired");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional tabular GAN with downstream-task feedback"};
  app.require_subcommand(1);
  std::optional<std::string> config;
  Overrides o;

  CLI::App* prepare = app.add_subcommand("prepare", "Fit column encoders and write schema.json");
  add_common_flags(*prepare, config, o);

  CLI::App* train = app.add_subcommand("train", "Train one variant, write model and loss trace");
  add_common_flags(*train, config, o);
  add_training_flags(*train, o);

  CLI::App* sample = app.add_subcommand("sample", "Decode synthetic rows from a trained model");
  add_common_flags(*sample, config, o);
  sample->add_option("--model", o.model, "Model JSON (default <out>/model_<variant>.json)");
  sample->add_option("--n", o.n, "Number of rows");
  sample->add_option("--variant", o.variant, "Variant whose model to load");

  CLI::App* experiment =
      app.add_subcommand("experiment", "Paired base vs feedback cross-validated efficacy");
  add_common_flags(*experiment, config, o);
  add_training_flags(*experiment, o);
  experiment->add_option("--folds", o.folds, "Cross-validation folds k");
  experiment->add_option("--reps", o.reps, "Sampling repetitions s per fold");
  experiment->add_option("--jobs", o.jobs, "Folds run concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dsfgan::cli::kConfig;
  }

  return dsfgan::cli::guarded(
      [&]() {
        const dsfgan::cli::RunConfig run = dsfgan::cli::resolve_config(config, o);
        if (prepare->parsed()) return dsfgan::cli::cmd_prepare(run, std::cout);
        if (train->parsed()) return dsfgan::cli::cmd_train(run, std::cout);
        if (sample->parsed()) return dsfgan::cli::cmd_sample(run, std::cout);
        return dsfgan::cli::cmd_experiment(run, std::cout);
      },
      std::cerr);
}
