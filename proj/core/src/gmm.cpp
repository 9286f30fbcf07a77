// Copyright 2026 The dsfgan Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "dsfgan/random.hpp"
#include "dsfgan/tabular.hpp"

namespace dsfgan {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2 pi)

double log_normal(double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) - kLogSqrt2Pi;
}

struct EmFit {
  std::vector<MixtureMode> modes;
  double log_likelihood = -std::numeric_limits<double>::infinity();
};

// k-means++ seeding: first centre uniform, later ones proportional to the
// squared distance from the nearest chosen centre.
std::vector<double> seed_centres(std::span<const double> x, std::size_t k, Rng& rng) {
  std::vector<double> centres{x[rng.index(x.size())]};
  std::vector<double> dist(x.size());
  while (centres.size() < k) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centres) best = std::min(best, (x[i] - c) * (x[i] - c));
      dist[i] = best;
    }
    if (std::all_of(dist.begin(), dist.end(), [](double d) { return d == 0.0; })) break;
    centres.push_back(x[rng.categorical(dist)]);
  }
  return centres;
}

EmFit run_em(std::span<const double> x, std::size_t k, double var_floor, const GmmConfig& cfg,
             Rng& rng) {
  const std::size_t n = x.size();
  const std::vector<double> centres = seed_centres(x, k, rng);
  k = centres.size();

  // Initial M-step from hard nearest-centre assignment.
  std::vector<double> resp(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (std::abs(x[i] - centres[j]) < std::abs(x[i] - centres[best])) best = j;
    }
    resp[i * k + best] = 1.0;
  }

  std::vector<MixtureMode> modes(k);
  auto m_step = [&] {
    for (std::size_t j = 0; j < k; ++j) {
      double nk = 0.0;
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i * k + j];
        s += resp[i * k + j] * x[i];
      }
      if (nk <= 1e-12) {
        modes[j].weight = 0.0;
        continue;
      }
      const double mu = s / nk;
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) ss += resp[i * k + j] * (x[i] - mu) * (x[i] - mu);
      modes[j] = {mu, std::sqrt(std::max(ss / nk, var_floor)), nk / static_cast<double>(n)};
    }
  };
  m_step();

  double prev = -std::numeric_limits<double>::infinity();
  double ll = prev;
  std::vector<double> logp(k);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        logp[j] = modes[j].weight > 0.0
                      ? std::log(modes[j].weight) + log_normal(x[i], modes[j].mean, modes[j].stddev)
                      : -std::numeric_limits<double>::infinity();
        mx = std::max(mx, logp[j]);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) total += std::exp(logp[j] - mx);
      const double lse = mx + std::log(total);
      ll += lse;
      for (std::size_t j = 0; j < k; ++j) resp[i * k + j] = std::exp(logp[j] - lse);
    }
    ll /= static_cast<double>(n);
    m_step();
    if (std::abs(ll - prev) < cfg.tolerance) break;
    prev = ll;
  }
  return {modes, ll * static_cast<double>(n)};
}

}  // namespace

double variance_floor(double range) { return range > 0.0 ? 1e-6 * range * range : 1e-6; }

std::vector<MixtureMode> fit_gmm(std::span<const double> values, const GmmConfig& config,
                                 Rng& rng) {
  if (values.empty()) return {MixtureMode{0.0, std::sqrt(variance_floor(0.0)), 1.0}};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double floor = variance_floor(*hi - *lo);
  if (*hi == *lo) return {MixtureMode{*lo, std::sqrt(floor), 1.0}};

  std::set<double> distinct;
  for (double v : values) {
    distinct.insert(v);
    if (distinct.size() > config.max_modes) break;
  }
  const std::size_t max_k = std::max<std::size_t>(1, std::min(config.max_modes, distinct.size()));
  const double log_n = std::log(static_cast<double>(values.size()));

  EmFit best;
  double best_bic = std::numeric_limits<double>::infinity();
  int worse_in_a_row = 0;
  for (std::size_t k = 1; k <= max_k; ++k) {
    EmFit fit = run_em(values, k, floor, config, rng);
    const double params = 3.0 * static_cast<double>(fit.modes.size()) - 1.0;
    const double bic = -2.0 * fit.log_likelihood + params * log_n;
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(fit);
      worse_in_a_row = 0;
    } else if (++worse_in_a_row == 2) {
      break;
    }
  }

  std::vector<MixtureMode> kept;
  for (const MixtureMode& m : best.modes) {
    if (m.weight >= config.prune_weight) kept.push_back(m);
  }
  double total = 0.0;
  for (const MixtureMode& m : kept) total += m.weight;
  for (MixtureMode& m : kept) m.weight /= total;
  std::sort(kept.begin(), kept.end(),
            [](const MixtureMode& a, const MixtureMode& b) { return a.mean < b.mean; });
  return kept;
}

}  // namespace dsfgan
