// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <memory>

#include "dsfgan/errors.hpp"
#include "dsfgan/gan.hpp"
#include "dsfgan/random.hpp"
#include "support/grad_check.hpp"
#include "support/random_graphs.hpp"
#include "support/toy_data.hpp"

namespace dsfgan {
namespace {

ColumnMeta categorical(std::string name, std::vector<std::string> cats,
                       std::vector<std::size_t> counts, bool target = false) {
  ColumnMeta m;
  m.name = std::move(name);
  m.kind = ColumnKind::kCategorical;
  m.categories = std::move(cats);
  m.category_counts = std::move(counts);
  m.is_target = target;
  return m;
}

ColumnMeta continuous(std::string name, bool target = false) {
  ColumnMeta m;
  m.name = std::move(name);
  m.kind = ColumnKind::kContinuous;
  m.modes = {{0.0, 1.0, 1.0}};
  m.min = -4.0;
  m.max = 4.0;
  m.is_target = target;
  return m;
}

Architecture tiny_arch() {
  Architecture a;
  a.noise_dim = 6;
  a.generator_hidden = {12, 12};
  a.critic_hidden = {12, 12};
  return a;
}

struct Fixture {
  std::shared_ptr<const TableSchema> schema;
  Tensor data;
};

Fixture toy_fixture(std::size_t rows, std::uint64_t seed) {
  const RawTable t = testing::toy_classification(rows, seed);
  Rng rng(derive_seed(seed, "schema"));
  auto schema = std::make_shared<const TableSchema>(
      TableSchema::fit(t, testing::toy_classification_config(), GmmConfig{}, rng));
  Rng enc(derive_seed(seed, "encode"));
  Tensor data = schema->encode(t.rows, enc);
  return {schema, std::move(data)};
}

Tensor cond_for(const TableSchema& s, std::size_t segment, std::size_t category, std::size_t n) {
  Tensor c(n, s.cond_width());
  const CategoricalSegment& seg = s.categorical_segments()[segment];
  for (std::size_t r = 0; r < n; ++r) c(r, seg.cond_offset + category) = 1.0;
  return c;
}

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

TEST(CondVector, SingleCategoryIsForced) {
  const TableSchema s({continuous("x", true), categorical("c", {"only"}, {5})},
                      TaskKind::kRegression, 0);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const CondVector cv = sample_cond_vector(s, rng);
    ASSERT_EQ(cv.vector, std::vector<double>{1.0});
    ASSERT_EQ(cv.category, 0u);
  }
}

TEST(CondVector, ColumnsChosenUniformly) {
  const TableSchema s({continuous("x", true), categorical("a", {"p", "q"}, {5, 5}),
                       categorical("b", {"r", "s", "t"}, {1, 1, 1})},
                      TaskKind::kRegression, 0);
  Rng rng(2);
  int first = 0;
  for (int i = 0; i < 10000; ++i) {
    const CondVector cv = sample_cond_vector(s, rng);
    ASSERT_EQ(std::count(cv.vector.begin(), cv.vector.end(), 1.0), 1);
    const CategoricalSegment& seg = s.categorical_segments()[cv.segment];
    ASSERT_EQ(cv.vector[seg.cond_offset + cv.category], 1.0);
    first += cv.segment == 0 ? 1 : 0;
  }
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(CondVector, CategoriesFollowLogFrequency) {
  const TableSchema s({continuous("x", true), categorical("c", {"a", "b"}, {90, 10})},
                      TaskKind::kRegression, 0);
  Rng rng(3);
  int a = 0;
  for (int i = 0; i < 10000; ++i) a += sample_cond_vector(s, rng).category == 0 ? 1 : 0;
  const double expected = std::log(91.0) / (std::log(91.0) + std::log(11.0));
  EXPECT_NEAR(a / 10000.0, expected, 0.02);
}

TEST(CondVector, EmpiricalModeFollowsCounts) {
  const TableSchema s({continuous("x", true), categorical("c", {"a", "b"}, {90, 10})},
                      TaskKind::kRegression, 0);
  Rng rng(4);
  int a = 0;
  for (int i = 0; i < 10000; ++i) {
    a += sample_cond_vector(s, rng, CondSampling::kEmpirical).category == 0 ? 1 : 0;
  }
  EXPECT_NEAR(a / 10000.0, 0.9, 0.02);
}

TEST(CondVector, NoCategoricalColumnsGivesEmptyCondition) {
  const TableSchema s({continuous("x"), continuous("y", true)}, TaskKind::kRegression, 0);
  Rng rng(5);
  EXPECT_TRUE(sample_cond_vector(s, rng).empty());
  EXPECT_EQ(sample_cond_batch(s, 7, rng).vectors.cols(), 0u);
}

// ---------------------------------------------------------------------------
// Generator and losses
// ---------------------------------------------------------------------------

TEST(Generate, ShapeRangeAndSimplexSegments) {
  const Fixture f = toy_fixture(200, 1);
  const GanModel model(f.schema, tiny_arch(), 7);
  Rng rng(8);
  Tape tape;
  const auto params = bind_generator(tape, model, false);
  const CondBatch cb = sample_cond_batch(*f.schema, 32, rng);
  const GeneratedBatch g = generate(model, params, cb.vectors, 32, rng);
  const Tensor& rows = g.rows.value();
  ASSERT_EQ(rows.rows(), 32u);
  ASSERT_EQ(rows.cols(), f.schema->width());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (std::size_t c = 0; c < f.schema->columns().size(); ++c) {
      const ColumnLayout& l = f.schema->layout()[c];
      std::size_t start = l.offset;
      if (f.schema->columns()[c].kind == ColumnKind::kContinuous) {
        EXPECT_LE(std::abs(rows(r, l.offset)), 1.0);
        ++start;
      }
      double total = 0.0;
      for (std::size_t i = start; i < l.offset + l.width; ++i) total += rows(r, i);
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
  EXPECT_EQ(g.cond_probs.cols(), f.schema->cond_width());
}

TEST(Generate, DeterministicForSeedAndCondition) {
  const Fixture f = toy_fixture(200, 2);
  const GanModel model(f.schema, tiny_arch(), 9);
  const Tensor cond = cond_for(*f.schema, 0, 1, 16);
  auto run = [&] {
    Rng rng(10);
    Tape tape;
    const auto params = bind_generator(tape, model, false);
    return generate(model, params, cond, 16, rng).rows.value();
  };
  EXPECT_EQ(run(), run());
}

TEST(Generate, RejectsMismatchedCondition) {
  const Fixture f = toy_fixture(100, 3);
  const GanModel model(f.schema, tiny_arch(), 1);
  Rng rng(1);
  Tape tape;
  const auto params = bind_generator(tape, model, false);
  EXPECT_THROW(generate(model, params, Tensor(4, f.schema->cond_width()), 5, rng), ShapeError);
}

TEST(CriticLoss, ClosedForms) {
  Tape tape;
  Var c = tape.constant(Tensor(3, 1, 0.7));
  EXPECT_DOUBLE_EQ(critic_loss(c, c).value().item(), 0.0);
  Var real = tape.constant(Tensor(2, 1, 1.0));
  Var fake = tape.constant(Tensor(2, 1, 0.0));
  EXPECT_DOUBLE_EQ(critic_loss(real, fake).value().item(), -1.0);
}

TEST(CriticLoss, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  Mlp critic({3, 4, 1}, Activation::kLeakyRelu, 0.2, rng);
  const Tensor real = testing::random_tensor(5, 3, rng);
  const Tensor fake = testing::random_tensor(5, 3, rng);
  std::vector<Tensor> params;
  for (const Tensor* t : std::as_const(critic).parameters()) params.push_back(*t);
  const auto result = testing::check_gradients(params, [&](Tape& tape, std::span<const Var> p) {
    return critic_loss(critic.apply(tape.constant(real), p), critic.apply(tape.constant(fake), p));
  }, 1e-5, 1e-6);  // real and fake terms cancel on some entries
  EXPECT_LT(result.max_rel_error, 1e-5) << "abs " << result.max_abs_error;
}

TEST(CondLoss, ClosedForms) {
  Tape tape;
  const Tensor cond(1, 4, {0, 0, 1, 0});
  EXPECT_LE(cond_loss(tape.constant(cond), cond).value().item(), 1e-6);
  EXPECT_NEAR(cond_loss(tape.constant(Tensor(1, 4, 0.25)), cond).value().item(), std::log(4.0),
              1e-9);
  const Tensor probs(2, 2, {0.5, 0.5, 0.9, 0.1});
  const Tensor two(2, 2, {1, 0, 1, 0});
  EXPECT_NEAR(cond_loss(tape.constant(probs), two).value().item(),
              -(std::log(0.5) + std::log(0.9)) / 2.0, 1e-12);
  EXPECT_NEAR(cond_loss(tape.constant(probs), two).value().item(), 0.3993, 1e-4);
}

TEST(CondLoss, EmptyConditionIsZero) {
  Tape tape;
  EXPECT_EQ(cond_loss(tape.constant(Tensor(3, 0)), Tensor(3, 0)).value().item(), 0.0);
}

TEST(CondLoss, GradientConfinedToConditionedSegment) {
  Rng rng(12);
  Tape tape;
  Var a = tape.parameter(testing::random_tensor(4, 2, rng));
  Var b = tape.parameter(testing::random_tensor(4, 3, rng));
  Tensor cond(4, 5);
  for (std::size_t r = 0; r < 4; ++r) cond(r, r % 2) = 1.0;  // all rows condition column a
  Var h = cond_loss(concat_cols({softmax(a), softmax(b)}), cond);
  EXPECT_GE(h.value().item(), 0.0);
  tape.backward(h);
  const Tensor gb = tape.grad(b);
  for (double g : gb.data()) EXPECT_EQ(g, 0.0);
  const Tensor ga = tape.grad(a);
  EXPECT_GT(std::abs(ga(0, 0)), 0.0);
}

TEST(GeneratorLoss, ClosedFormAndFeedbackShift) {
  Tape tape;
  Var f_fake = tape.constant(Tensor(2, 1, 0.3));
  Var h = tape.constant(Tensor::scalar(0.2));
  EXPECT_NEAR(generator_loss(f_fake, h, tape.constant(Tensor::scalar(0.5))).value().item(), 0.4,
              1e-12);
  EXPECT_NEAR(generator_loss(f_fake, h).value().item(), -0.1, 1e-12);
}

TEST(GeneratorLoss, ZeroFeedbackLeavesGradientsUnchanged) {
  Rng rng(13);
  const Tensor x = testing::random_tensor(3, 2, rng);
  auto grads = [&](bool with_zero) {
    return testing::tape_gradients({x}, [&](Tape&, std::span<const Var> p) {
      Var f = row_sum(tanh(p[0]));
      Var h = mean(square(p[0]));
      if (!with_zero) return generator_loss(f, h);
      return generator_loss(f, h, scale(sum(p[0]), 0.0));
    })[0];
  };
  EXPECT_EQ(grads(false), grads(true));
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

TrainConfig small_train(int epochs, std::size_t batch, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  c.seed = seed;
  return c;
}

TEST(TrainConfig, Validation) {
  EXPECT_THROW(small_train(1, 10, 0).validate(), ConfigError);
  EXPECT_THROW(small_train(2, 1, 0).validate(), ConfigError);
  TrainConfig c = small_train(2, 10, 0);
  c.clip = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_train(2, 10, 0);
  c.critic_steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(small_train(2, 2, 0).validate());
}

TEST(Train, DeterministicInSeed) {
  const Fixture f = toy_fixture(120, 4);
  GanModel a(f.schema, tiny_arch(), 5);
  GanModel b(f.schema, tiny_arch(), 5);
  const auto ta = train(a, f.data, small_train(3, 40, 6));
  const auto tb = train(b, f.data, small_train(3, 40, 6));
  EXPECT_EQ(a.parameter_digest(), b.parameter_digest());
  ASSERT_EQ(ta.size(), 3u);
  EXPECT_EQ(ta.back().generator_loss, tb.back().generator_loss);
  EXPECT_EQ(a.epochs_trained(), 3);
}

TEST(Train, ZeroHookMatchesNoHookBitwise) {
  const Fixture f = toy_fixture(120, 5);
  GanModel a(f.schema, tiny_arch(), 7);
  GanModel b(f.schema, tiny_arch(), 7);
  train(a, f.data, small_train(4, 40, 8));
  FeedbackHook zero = [](FeedbackContext& ctx) -> std::optional<FeedbackOutput> {
    return FeedbackOutput{ctx.tape.constant(Tensor::scalar(0.0)), 0.0};
  };
  train(b, f.data, small_train(4, 40, 8), zero);
  EXPECT_EQ(a.parameter_digest(), b.parameter_digest());
}

TEST(Train, CriticWeightsStayClipped) {
  const Fixture f = toy_fixture(64, 6);
  GanModel model(f.schema, tiny_arch(), 9);
  TrainConfig cfg = small_train(6, 64, 10);  // one step per epoch: every update is observed
  cfg.clip = 0.01;
  int checked = 0;
  train(model, f.data, cfg, {}, [&](int, const GanModel& m) {
    for (const Tensor* t : m.critic().parameters()) {
      for (double w : t->data()) ASSERT_LE(std::abs(w), cfg.clip);
    }
    ++checked;
  });
  EXPECT_EQ(checked, 6);
}

TEST(Train, NonFiniteValueAbortsWithEpoch) {
  const Fixture f = toy_fixture(60, 7);
  GanModel model(f.schema, tiny_arch(), 11);
  FeedbackHook poison = [](FeedbackContext& ctx) -> std::optional<FeedbackOutput> {
    if (ctx.epoch < 2) return std::nullopt;
    return FeedbackOutput{log(ctx.tape.constant(Tensor::scalar(-1.0))), 0.0};
  };
  try {
    train(model, f.data, small_train(3, 30, 12), poison);
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    EXPECT_EQ(e.epoch(), 2);
  }
}

TEST(Train, HookSeesScheduleAndLiveBatchIsDifferentiable) {
  const Fixture f = toy_fixture(80, 8);
  GanModel model(f.schema, tiny_arch(), 13);
  std::vector<int> epochs;
  FeedbackHook probe = [&](FeedbackContext& ctx) -> std::optional<FeedbackOutput> {
    epochs.push_back(ctx.epoch);
    EXPECT_EQ(ctx.total_epochs, 3);
    Rng rng(1);
    const Tensor detached = ctx.sample_detached(5, rng);
    EXPECT_EQ(detached.rows(), 5u);
    Var live = ctx.sample_live(rng);
    EXPECT_EQ(live.rows(), ctx.batch_size);
    EXPECT_TRUE(ctx.tape.requires_grad(live.id()));
    return std::nullopt;
  };
  train(model, f.data, small_train(3, 40, 14), probe);
  EXPECT_EQ(epochs, (std::vector<int>{1, 1, 2, 2, 3, 3}));
}

TEST(Train, RejectsMismatchedData) {
  const Fixture f = toy_fixture(50, 9);
  GanModel model(f.schema, tiny_arch(), 1);
  EXPECT_THROW(train(model, Tensor(10, 3), small_train(2, 5, 1)), ShapeError);
}

// Default architecture on an easy two-column table: the generator learns to
// honour the condition.
TEST(Train, ConditionalMatchRateOnEasyTable) {
  RawTable t;
  t.names = {"color", "value"};
  t.kinds = {ColumnKind::kCategorical, ColumnKind::kContinuous};
  Rng data(15);
  const char* colors[] = {"blue", "green", "red"};
  for (int i = 0; i < 300; ++i) {
    const std::size_t c = data.index(3);
    t.rows.push_back({std::string(colors[c]), 10.0 * static_cast<double>(c) + data.normal()});
  }
  SchemaConfig cfg;
  cfg.columns = {{"color", ColumnKind::kCategorical}, {"value", ColumnKind::kContinuous}};
  cfg.target = "value";
  cfg.task = TaskKind::kRegression;
  Rng rng(16);
  auto schema = std::make_shared<const TableSchema>(TableSchema::fit(t, cfg, GmmConfig{}, rng));
  const Tensor encoded = schema->encode(t.rows, rng);
  GanModel model(schema, Architecture{}, 17);
  train(model, encoded, small_train(200, 100, 18));

  std::size_t matched = 0;
  std::size_t total = 0;
  Rng sample(19);
  for (std::size_t c = 0; c < 3; ++c) {
    Tape tape;
    const auto params = bind_generator(tape, model, false);
    const Tensor rows = generate(model, params, cond_for(*schema, 0, c, 200), 200, sample).rows.value();
    for (const Row& r : schema->decode(rows)) {
      matched += std::get<std::string>(r[0]) == schema->columns()[0].categories[c] ? 1 : 0;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(matched) / static_cast<double>(total), 0.8);
}

// ---------------------------------------------------------------------------
// Persistence and sampling
// ---------------------------------------------------------------------------

TEST(Model, SaveLoadIsBitExact) {
  const Fixture f = toy_fixture(80, 10);
  GanModel model(f.schema, tiny_arch(), 20);
  train(model, f.data, small_train(2, 40, 21));
  const std::string path =
      (std::filesystem::temp_directory_path() / "dsfgan_model_roundtrip.json").string();
  model.save(path);
  const GanModel back = GanModel::load(path);
  EXPECT_EQ(back.parameter_digest(), model.parameter_digest());
  EXPECT_EQ(back.to_json(), model.to_json());
  EXPECT_EQ(back.epochs_trained(), 2);
  Rng a(1);
  Rng b(1);
  EXPECT_EQ(sample_encoded(model, 30, a), sample_encoded(back, 30, b));
  std::filesystem::remove(path);
}

TEST(Model, MalformedDocumentsAreConfigErrors) {
  const Fixture f = toy_fixture(50, 11);
  const GanModel model(f.schema, tiny_arch(), 1);
  nlohmann::json j = model.to_json();
  j["generator"][0]["weight"] = {1.0, 2.0};
  EXPECT_THROW(GanModel::from_json(j), ConfigError);
  EXPECT_THROW(GanModel::from_json(nlohmann::json{{"format_version", 1}}), ConfigError);
  EXPECT_THROW(GanModel::load("/nonexistent/model.json"), ConfigError);
}

TEST(Model, InitDependsOnlyOnSeed) {
  const Fixture f = toy_fixture(50, 12);
  EXPECT_EQ(GanModel(f.schema, tiny_arch(), 3).parameter_digest(),
            GanModel(f.schema, tiny_arch(), 3).parameter_digest());
  EXPECT_NE(GanModel(f.schema, tiny_arch(), 3).parameter_digest(),
            GanModel(f.schema, tiny_arch(), 4).parameter_digest());
}

TEST(Sample, RowCountAndDeterminism) {
  const Fixture f = toy_fixture(50, 13);
  const GanModel model(f.schema, tiny_arch(), 5);
  Rng a(2);
  Rng b(2);
  const auto x = sample_rows(model, 1234, a);
  const auto y = sample_rows(model, 1234, b);
  EXPECT_EQ(x.size(), 1234u);
  EXPECT_EQ(x, y);
}

}  // namespace
}  // namespace dsfgan
