// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "dsfgan/errors.hpp"
#include "dsfgan/evaluation.hpp"
#include "dsfgan/random.hpp"
#include "support/toy_data.hpp"

namespace dsfgan {
namespace {

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

TEST(Metrics, PrecisionRecallExample) {
  // TP 2, FP 1, FN 1.
  const std::vector<double> truth{1, 1, 0, 1, 0};
  const std::vector<double> pred{1, 1, 1, 0, 0};
  const PrecisionRecall pr = precision_recall(truth, pred);
  EXPECT_DOUBLE_EQ(pr.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pr.recall, 2.0 / 3.0);
}

TEST(Metrics, PrecisionRecallZeroDenominators) {
  const std::vector<double> truth{0, 0, 0};
  const std::vector<double> pred{0, 0, 0};
  const PrecisionRecall pr = precision_recall(truth, pred);
  EXPECT_EQ(pr.precision, 0.0);
  EXPECT_EQ(pr.recall, 0.0);
  EXPECT_THROW(precision_recall(truth, std::vector<double>{1.0}), ShapeError);
}

TEST(Metrics, RmseAndR2Examples) {
  const std::vector<double> truth{0, 1, 0, 1};
  const std::vector<double> pred{0.1, 0.9, -0.1, 1.1};
  const RmseR2 r = rmse_r2(truth, pred);
  EXPECT_NEAR(r.rmse, 0.1, 1e-12);
  ASSERT_TRUE(r.r2.has_value());
  EXPECT_NEAR(*r.r2, 0.96, 1e-12);

  const RmseR2 mean_pred = rmse_r2(truth, std::vector<double>(4, 0.5));
  EXPECT_NEAR(*mean_pred.r2, 0.0, 1e-12);
  EXPECT_NEAR(mean_pred.rmse, 0.5, 1e-12);

  const RmseR2 constant = rmse_r2(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3});
  EXPECT_FALSE(constant.r2.has_value());
  EXPECT_NEAR(constant.rmse, std::sqrt(2.0 / 3.0), 1e-12);

  EXPECT_THROW(rmse_r2(std::vector<double>{1}, std::vector<double>{1}), ShapeError);
}

TEST(Metrics, ConfidenceIntervalUsesStudentT) {
  const double t_975_4 = 2.7764451051977987;
  const std::vector<double> v{1, 2, 3, 4, 5};
  const Interval i = confidence_interval(v);
  EXPECT_DOUBLE_EQ(i.mean, 3.0);
  EXPECT_NEAR(i.half_width, t_975_4 * std::sqrt(2.5) / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(i.half_width, 1.9632, 1e-4);

  const Interval same = confidence_interval(std::vector<double>{0.7, 0.7, 0.7});
  EXPECT_NEAR(same.half_width, 0.0, 1e-12);
  EXPECT_THROW(confidence_interval(std::vector<double>{1.0}), ConfigError);
}

TEST(Metrics, AverageSkipsUndefinedR2) {
  MetricRecord a;
  a.task = TaskKind::kRegression;
  a.rmse = 1.0;
  a.r2 = 0.5;
  MetricRecord b = a;
  b.rmse = 3.0;
  b.r2.reset();
  const std::vector<MetricRecord> recs{a, b};
  const MetricRecord m = average(recs);
  EXPECT_DOUBLE_EQ(m.rmse, 2.0);
  EXPECT_DOUBLE_EQ(*m.r2, 0.5);
  b.r2.reset();
  a.r2.reset();
  EXPECT_FALSE(average(std::vector<MetricRecord>{a, b}).r2.has_value());
}

// ---------------------------------------------------------------------------
// Pass-through oracle: real rows as the "synthetic" source must reproduce a
// downstream model trained directly on the real rows.
// ---------------------------------------------------------------------------

ColumnMeta one_mode(std::string name, double mean, double sd, double lo, double hi,
                    bool target = false) {
  ColumnMeta m;
  m.name = std::move(name);
  m.kind = ColumnKind::kContinuous;
  m.modes = {{mean, sd, 1.0}};
  m.min = lo;
  m.max = hi;
  m.is_target = target;
  return m;
}

ColumnMeta categorical(std::string name, std::vector<std::string> cats, bool target = false) {
  ColumnMeta m;
  m.name = std::move(name);
  m.kind = ColumnKind::kCategorical;
  m.category_counts.assign(cats.size(), 1);
  m.categories = std::move(cats);
  m.is_target = target;
  return m;
}

// Hand featurization of [x, region, target]: x / 4, the single mode flag and
// the region one-hot.
std::vector<double> oracle_features(const Row& r) {
  const double x = std::get<double>(r[0]);
  const bool a = std::get<std::string>(r[1]) == "a";
  return {x / 4.0, 1.0, a ? 1.0 : 0.0, a ? 0.0 : 1.0};
}

struct OracleFit {
  std::vector<double> w;
  double b = 0.0;
};

OracleFit oracle_gd(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                    bool logistic, int steps, double lr) {
  OracleFit fit{std::vector<double>(x[0].size(), 0.0), 0.0};
  const double m = static_cast<double>(x.size());
  for (int s = 0; s < steps; ++s) {
    std::vector<double> gw(fit.w.size(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double z = fit.b;
      for (std::size_t j = 0; j < fit.w.size(); ++j) z += fit.w[j] * x[i][j];
      const double e = logistic ? 1.0 / (1.0 + std::exp(-z)) - y[i] : 2.0 * (z - y[i]);
      for (std::size_t j = 0; j < fit.w.size(); ++j) gw[j] += e * x[i][j];
      gb += e;
    }
    for (std::size_t j = 0; j < fit.w.size(); ++j) fit.w[j] -= lr * gw[j] / m;
    fit.b -= lr * gb / m;
  }
  return fit;
}

double oracle_predict(const OracleFit& f, const std::vector<double>& x, bool logistic) {
  double z = f.b;
  for (std::size_t j = 0; j < x.size(); ++j) z += f.w[j] * x[j];
  return logistic ? 1.0 / (1.0 + std::exp(-z)) : z;
}

std::vector<Row> oracle_rows(std::size_t n, std::uint64_t seed, bool regression) {
  Rng rng(seed);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::clamp(rng.normal(), -3.9, 3.9);
    const bool a = rng.uniform() < 0.5;
    const double score = x + (a ? 0.5 : -0.5) + 0.5 * rng.normal();
    Value target = regression ? Value(std::clamp(10.0 + 2.0 * score, 0.0, 20.0))
                              : Value(std::string(score > 0.3 ? "yes" : "no"));
    rows.push_back({x, std::string(a ? "a" : "b"), target});
  }
  return rows;
}

TableSchema oracle_schema(bool regression) {
  if (regression) {
    return TableSchema({one_mode("x", 0.0, 1.0, -4.0, 4.0), categorical("region", {"a", "b"}),
                        one_mode("t", 10.0, 2.0, 0.0, 20.0, true)},
                       TaskKind::kRegression, 0);
  }
  return TableSchema({one_mode("x", 0.0, 1.0, -4.0, 4.0), categorical("region", {"a", "b"}),
                      categorical("y", {"no", "yes"}, true)},
                     TaskKind::kClassification, 1);
}

TEST(Efficacy, PassThroughMatchesDirectClassifier) {
  const TableSchema schema = oracle_schema(false);
  const std::vector<Row> train = oracle_rows(300, 1, false);
  const std::vector<Row> valid = oracle_rows(200, 2, false);
  const SyntheticSource real = [&](std::size_t n, Rng&) {
    return std::vector<Row>(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(n));
  };
  const MetricRecord m = efficacy_eval(real, schema, valid, train.size(), 7, {1000, 0.1});

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const Row& r : train) {
    x.push_back(oracle_features(r));
    y.push_back(std::get<std::string>(r[2]) == "yes" ? 1.0 : 0.0);
  }
  const OracleFit fit = oracle_gd(x, y, true, 1000, 0.1);
  double tp = 0, fp = 0, fn = 0;
  for (const Row& r : valid) {
    const bool truth = std::get<std::string>(r[2]) == "yes";
    const bool pred = oracle_predict(fit, oracle_features(r), true) >= 0.5;
    tp += truth && pred;
    fp += !truth && pred;
    fn += truth && !pred;
  }
  EXPECT_FALSE(m.degenerate);
  EXPECT_DOUBLE_EQ(m.precision, tp / (tp + fp));
  EXPECT_DOUBLE_EQ(m.recall, tp / (tp + fn));
  EXPECT_GT(m.precision, 0.7);
}

TEST(Efficacy, PassThroughMatchesDirectRegressor) {
  const TableSchema schema = oracle_schema(true);
  const std::vector<Row> train = oracle_rows(300, 3, true);
  const std::vector<Row> valid = oracle_rows(200, 4, true);
  const SyntheticSource real = [&](std::size_t n, Rng&) {
    return std::vector<Row>(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(n));
  };
  const MetricRecord m = efficacy_eval(real, schema, valid, train.size(), 8, {1000, 0.05});

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const Row& r : train) {
    x.push_back(oracle_features(r));
    y.push_back(std::get<double>(r[2]) / 20.0);
  }
  const OracleFit fit = oracle_gd(x, y, false, 1000, 0.05);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double mean = 0.0;
  for (const Row& r : valid) mean += std::get<double>(r[2]) / 20.0;
  mean /= static_cast<double>(valid.size());
  for (const Row& r : valid) {
    const double t = std::get<double>(r[2]) / 20.0;
    const double p = oracle_predict(fit, oracle_features(r), false);
    ss_res += (t - p) * (t - p);
    ss_tot += (t - mean) * (t - mean);
  }
  EXPECT_NEAR(m.rmse, std::sqrt(ss_res / static_cast<double>(valid.size())), 1e-10);
  ASSERT_TRUE(m.r2.has_value());
  EXPECT_NEAR(*m.r2, 1.0 - ss_res / ss_tot, 1e-9);
}

TEST(Efficacy, SingleClassSampleScoresConstantPredictor) {
  const TableSchema schema = oracle_schema(false);
  const std::vector<Row> valid = oracle_rows(50, 5, false);
  const SyntheticSource all_yes = [](std::size_t n, Rng&) {
    return std::vector<Row>(n, Row{0.0, std::string("a"), std::string("yes")});
  };
  const MetricRecord m = efficacy_eval(all_yes, schema, valid, 20, 1, {100, 0.1});
  EXPECT_TRUE(m.degenerate);
  EXPECT_EQ(m.recall, 1.0);
}

TEST(Efficacy, ErrorsAndDeterminism) {
  const RawTable t = testing::toy_classification(200, 9);
  Rng rng(1);
  auto schema = std::make_shared<const TableSchema>(
      TableSchema::fit(t, testing::toy_classification_config(), GmmConfig{}, rng));
  Architecture arch;
  arch.noise_dim = 6;
  arch.generator_hidden = {12};
  arch.critic_hidden = {12};
  const GanModel model(schema, arch, 3);
  const std::span<const Row> valid(t.rows.data(), 50);
  EXPECT_THROW(efficacy_eval(model, valid, 0, 1), ConfigError);
  EXPECT_THROW(efficacy_eval(model, std::span<const Row>{}, 10, 1), DataError);
  const MetricRecord a = efficacy_eval(model, valid, 100, 42);
  const MetricRecord b = efficacy_eval(model, valid, 100, 42);
  EXPECT_EQ(a.to_json(), b.to_json());
}

// ---------------------------------------------------------------------------
// Paired experiment
// ---------------------------------------------------------------------------

ExperimentConfig smoke_config() {
  ExperimentConfig c;
  c.folds = 2;
  c.reps = 2;
  c.seed = 11;
  c.train.epochs = 4;
  c.train.batch_size = 100;
  c.architecture.noise_dim = 8;
  c.architecture.generator_hidden = {16, 16};
  c.architecture.critic_hidden = {16, 16};
  c.eval_fit = {200, 0.1};
  return c;
}

TEST(Experiment, ConfigValidation) {
  ExperimentConfig c = smoke_config();
  c.folds = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = smoke_config();
  c.reps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = smoke_config();
  c.jobs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = smoke_config();
  c.feedback.lambda = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(smoke_config().validate());
}

TEST(Experiment, GuardsRejectLeakageAndUnpairedStarts) {
  const std::vector<std::size_t> train{0, 1, 2};
  const std::vector<std::size_t> overlap{2, 3};
  const std::vector<std::size_t> rest{3, 4};
  EXPECT_THROW(FoldGuards::check_leakage(train, overlap, 5), DataError);
  EXPECT_THROW(FoldGuards::check_leakage(train, std::vector<std::size_t>{3}, 5), DataError);
  EXPECT_NO_THROW(FoldGuards::check_leakage(train, rest, 5));
  EXPECT_THROW(FoldGuards::check_pairing("a", "b", "c", "c"), DataError);
  EXPECT_THROW(FoldGuards::check_pairing("a", "a", "c", "d"), DataError);
  EXPECT_NO_THROW(FoldGuards::check_pairing("a", "a", "c", "c"));
}

TEST(Experiment, SmokeRunIsPairedAndReproducible) {
  const RawTable t = testing::toy_classification(500, 12);
  const SchemaConfig sc = testing::toy_classification_config();
  const ExperimentConfig cfg = smoke_config();
  const PairedReport r = run_experiment(t, sc, cfg);

  ASSERT_EQ(r.folds.size(), 2u);
  std::set<std::string> validation_digests;
  for (const FoldResult& f : r.folds) {
    EXPECT_EQ(f.train_rows + f.validation_rows, 500u);
    validation_digests.insert(f.validation_digest);
    ASSERT_EQ(f.sampling_seeds.size(), 2u);
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_EQ(f.sampling_seeds[k], derive_seed(cfg.seed, "sample", f.fold * cfg.reps + k));
    }
    EXPECT_EQ(f.base.reps.size(), 2u);
    EXPECT_EQ(f.feedback.reps.size(), 2u);
    EXPECT_EQ(f.base.trace.size(), 4u);
    EXPECT_EQ(f.base.trace[1].critic_loss, f.feedback.trace[1].critic_loss);  // warmup epoch 2
    EXPECT_NE(f.base.final_digest, f.feedback.final_digest);
  }
  EXPECT_EQ(validation_digests.size(), 2u);
  ASSERT_EQ(r.base.summary.size(), 2u);
  EXPECT_EQ(r.base.summary[0].first, "precision");
  EXPECT_EQ(r.feedback.summary[1].first, "recall");
  for (const auto& [name, interval] : r.feedback.summary) {
    EXPECT_TRUE(std::isfinite(interval.mean)) << name;
    EXPECT_GE(interval.half_width, 0.0) << name;
  }
  const nlohmann::json j = r.to_json();
  EXPECT_EQ(j.at("aggregation").get<std::string>().empty(), false);
  for (const auto& f : j.at("folds")) EXPECT_EQ(f.at("guards").at("pairing"), "pass");
  EXPECT_NE(r.to_table().find("±"), std::string::npos);

  ExperimentConfig parallel = cfg;
  parallel.jobs = 2;
  EXPECT_EQ(run_experiment(t, sc, parallel).to_json().dump(), j.dump());
}

TEST(Experiment, FoldFailureNamesLowestFold) {
  const RawTable t = testing::toy_regression(200, 13);
  ExperimentConfig cfg = smoke_config();
  cfg.train.epochs = 2;
  cfg.feedback.fit = {200, 1e6};  // the downstream fit diverges once feedback starts
  try {
    run_experiment(t, testing::toy_regression_config(), cfg);
    FAIL() << "expected ExperimentError";
  } catch (const ExperimentError& e) {
    EXPECT_EQ(e.fold(), 0);
  }
}

TEST(Experiment, DatasetDigestTracksContent) {
  const RawTable a = testing::toy_classification(50, 14);
  RawTable b = a;
  EXPECT_EQ(dataset_digest(a), dataset_digest(b));
  b.rows[3][0] = 123.0;
  EXPECT_NE(dataset_digest(a), dataset_digest(b));
}

}  // namespace
}  // namespace dsfgan
