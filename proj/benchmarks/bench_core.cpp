// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <memory>

#include "dsfgan/autodiff.hpp"
#include "dsfgan/feedback.hpp"
#include "dsfgan/gan.hpp"
#include "dsfgan/mlp.hpp"
#include "dsfgan/random.hpp"
#include "dsfgan/tabular.hpp"

namespace {

using namespace dsfgan;

Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.data()) v = rng.normal();
  return t;
}

// Toy table: two continuous columns, one categorical feature, binary label.
RawTable toy_table(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  RawTable t;
  t.names = {"a", "b", "c", "y"};
  t.kinds = {ColumnKind::kContinuous, ColumnKind::kContinuous, ColumnKind::kCategorical,
             ColumnKind::kCategorical};
  const char* cats[] = {"p", "q", "r"};
  for (std::size_t i = 0; i < rows; ++i) {
    const double a = rng.normal();
    const double b = rng.uniform() < 0.5 ? rng.normal() - 5.0 : rng.normal() + 5.0;
    t.rows.push_back({a, b, std::string(cats[rng.index(3)]), std::string(a + 0.1 * b > 0 ? "yes" : "no")});
  }
  return t;
}

SchemaConfig toy_config() {
  SchemaConfig c;
  c.columns = {{"a", ColumnKind::kContinuous},
               {"b", ColumnKind::kContinuous},
               {"c", ColumnKind::kCategorical},
               {"y", ColumnKind::kCategorical}};
  c.target = "y";
  c.task = TaskKind::kClassification;
  c.positive_class = "yes";
  return c;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_tensor(n, n, rng);
  const Tensor b = random_tensor(n, n, rng);
  for (auto _ : state) {
    Tape tape;
    Var c = matmul(tape.constant(a), tape.constant(b));
    benchmark::DoNotOptimize(c.value().data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Mlp mlp({64, 256, 256, 32}, Activation::kRelu, 0.0, rng);
  const Tensor x = random_tensor(batch, 64, rng);
  for (auto _ : state) {
    Tape tape;
    const auto params = mlp.bind(tape, true);
    Var loss = mean(square(mlp.apply(tape.constant(x), params)));
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.grad(params.front()).data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(batch));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(100)->Arg(500);

void BM_GmmFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng data(3);
  std::vector<double> v(n);
  for (double& x : v) x = data.uniform() < 0.3 ? data.normal() : 50.0 + 3.0 * data.normal();
  for (auto _ : state) {
    Rng rng(4);
    benchmark::DoNotOptimize(fit_gmm(v, GmmConfig{}, rng));
  }
}
BENCHMARK(BM_GmmFit)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const bool feedback = state.range(0) != 0;
  const RawTable t = toy_table(1000, 5);
  Rng rng(6);
  auto schema = std::make_shared<const TableSchema>(TableSchema::fit(t, toy_config(), GmmConfig{}, rng));
  const Tensor data = schema->encode(t.rows, rng);
  TrainConfig cfg;
  cfg.epochs = 2;  // epoch 2 of 2 is past warmup, so the hook is active
  cfg.batch_size = 100;
  for (auto _ : state) {
    GanModel model(schema, Architecture{}, 7);
    FeedbackHook hook = feedback ? make_feedback_hook(FeedbackConfig{}, schema, 8) : FeedbackHook{};
    benchmark::DoNotOptimize(train(model, data, cfg, hook));
  }
  state.SetLabel(feedback ? "base+feedback epochs" : "base epochs");
}
BENCHMARK(BM_TrainEpoch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
