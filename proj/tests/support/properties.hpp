#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ebd/oracle.hpp"
#include "ebd/rng.hpp"
#include "ebd/toy_lm.hpp"

namespace ebd::test {

inline const std::vector<double> kBetaGrid{0, 0.5, 1, 2, 3.5, 5};

// Perturbed copy of `base` restricted to its support: multiplicative noise
// of size `scale` in log space, renormalized.
inline SeqDistribution perturb(const SeqDistribution& base, double scale, Rng& rng) {
  SeqDistribution::Table table;
  double total = 0.0;
  for (const auto& [y, p] : base) {
    const double w = p * std::exp(scale * (2.0 * rng.uniform() - 1.0));
    table[y] = w;
    total += w;
  }
  for (auto& [y, w] : table) w /= total;
  return SeqDistribution(std::move(table));
}

struct MonotonicityReport {
  double worst_kl_drop = 0.0;     // max over grid of KL(beta_i) - KL(beta_{i+1})
  double worst_score_drop = 0.0;  // same for E[S]
};

inline MonotonicityReport monotonicity(const SeqDistribution& prior, TiltSpec tilt,
                                       const std::vector<double>& grid = kBetaGrid) {
  MonotonicityReport r;
  double last_kl = -INFINITY, last_score = -INFINITY;
  for (double beta : grid) {
    tilt.beta = beta;
    const auto post = exact_posterior(prior, tilt);
    const double k = kl(post.distribution, prior);
    const double s = expected_score(post.distribution, tilt);
    r.worst_kl_drop = std::max(r.worst_kl_drop, last_kl - k);
    r.worst_score_drop = std::max(r.worst_score_drop, last_score - s);
    last_kl = k;
    last_score = s;
  }
  return r;
}

// Largest objective(q) - objective(posterior) over random perturbations q
// at every nonzero beta of the grid; <= 0 means the posterior is optimal.
inline double worst_optimality_gap(const SeqDistribution& prior, TiltSpec tilt, int trials,
                                   std::uint64_t seed,
                                   const std::vector<double>& grid = kBetaGrid) {
  double worst = -INFINITY;
  Rng rng(seed);
  for (double beta : grid) {
    if (beta == 0.0) continue;
    tilt.beta = beta;
    const auto post = exact_posterior(prior, tilt);
    const double best = objective(post.distribution, prior, tilt).value;
    for (int i = 0; i < trials; ++i) {
      const double scale = std::pow(10.0, -4.0 + 4.0 * rng.uniform());
      const auto q = perturb(post.distribution, scale, rng);
      worst = std::max(worst, objective(q, prior, tilt).value - best);
    }
  }
  return worst;
}

}  // namespace ebd::test
