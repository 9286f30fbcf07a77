// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "dsfgan/errors.hpp"
#include "dsfgan/evaluation.hpp"

namespace dsfgan {

PrecisionRecall precision_recall(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("precision_recall: " + std::to_string(y_true.size()) + " labels, " +
                     std::to_string(y_pred.size()) + " predictions");
  }
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool truth = y_true[i] >= 0.5;
    const bool pred = y_pred[i] >= 0.5;
    tp += static_cast<double>(truth && pred);
    fp += static_cast<double>(!truth && pred);
    fn += static_cast<double>(truth && !pred);
  }
  PrecisionRecall pr;
  pr.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  pr.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  return pr;
}

RmseR2 rmse_r2(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ShapeError("rmse_r2: " + std::to_string(y_true.size()) + " targets, " +
                     std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.size() < 2) throw ShapeError("rmse_r2: need at least two values");
  const double n = static_cast<double>(y_true.size());
  const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) / n;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  RmseR2 out;
  out.rmse = std::sqrt(ss_res / n);
  if (ss_tot > 0.0) out.r2 = 1.0 - ss_res / ss_tot;
  return out;
}

Interval confidence_interval(std::span<const double> values) {
  if (values.size() < 2) throw ConfigError("confidence_interval: need at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.975);
  return {mean, t * sd / std::sqrt(n)};
}

}  // namespace dsfgan
