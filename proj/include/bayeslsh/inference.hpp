// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "bayeslsh/corpus.hpp"

namespace bayeslsh {

// Estimates within `delta` of the truth with probability at least 1 - gamma.
struct AccuracyParams {
  double delta = 0.05;
  double gamma = 0.03;

  void validate() const;
};

// A true pair is pruned with probability at most epsilon.
struct RecallParam {
  double epsilon = 0.03;

  void validate() const;
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
  friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

// ---------------------------------------------------------------------------
// Frequentist estimation with a fixed number of hashes.

// m / n; for cosine the collision rate is mapped to a cosine via r2c (rates
// below 0.5 map to 0).
double ml_estimate(std::uint32_t m, std::uint32_t n, Measure measure = Measure::kJaccard);

// How the real limits (s -/+ delta) n of the binomial sum become integers.
enum class BoundRounding {
  kInward,   // ceil lower, floor upper
  kOutward,  // floor lower, ceil upper
};

// Pr[ML estimate within delta of s] for m ~ Binomial(n, s): the binomial mass
// on m in [(s - delta) n, (s + delta) n], limits rounded per `rounding` and
// clamped to [0, n].
double ml_concentration_prob(double s, std::size_t n, double delta,
                             BoundRounding rounding = BoundRounding::kInward);

struct RequiredHashesOptions {
  BoundRounding rounding = BoundRounding::kOutward;
  std::size_t step = 16;  // hash counts scanned: step, 2 step, ...
  std::size_t limit = 1U << 20;
};

// Smallest n on the scan grid whose ml_concentration_prob reaches 1 - gamma.
// The probability is not monotone in n (lattice effects), so the scan is
// linear rather than a bisection.
std::size_t required_hashes(double s, double delta, double gamma,
                            const RequiredHashesOptions& options = {});

// Method-of-moments Beta fit with population variance. Falls back to
// Beta(1, 1) with fewer than `min_samples` samples, zero variance, or a
// non-positive solution.
BetaParams fit_beta_mom(std::span<const double> samples, std::size_t min_samples = 20);

// ---------------------------------------------------------------------------
// Cosine collision rate r = 1 - theta/pi on [0.5, 1] and cosine s on [0, 1].

double r2c(double r);
double c2r(double s);

// Posterior for Jaccard: Beta(m + alpha, n - m + beta).
double jaccard_prune_prob(const BetaParams& prior, std::uint32_t m, std::uint32_t n, double t);
// Posterior mode (m + alpha - 1) / (n + alpha + beta - 2); boundary value
// when either posterior parameter is <= 1.
double jaccard_map(const BetaParams& prior, std::uint32_t m, std::uint32_t n);
double jaccard_concentration_prob(const BetaParams& prior, std::uint32_t m, std::uint32_t n,
                                  double estimate, double delta);

// Posterior for cosine: uniform prior on r in [0.5, 1], density proportional
// to r^m (1 - r)^(n - m) on that interval.
double cosine_prune_prob(std::uint32_t m, std::uint32_t n, double t);
double cosine_map(std::uint32_t m, std::uint32_t n);
double cosine_concentration_prob(std::uint32_t m, std::uint32_t n, double estimate,
                                 double delta);

// Per-measure dispatch over the functions above.
class PosteriorModel {
 public:
  static PosteriorModel jaccard(BetaParams prior = {});
  static PosteriorModel cosine();

  Measure measure() const noexcept { return measure_; }
  const BetaParams& prior() const noexcept { return prior_; }

  double prune_probability(std::uint32_t m, std::uint32_t n, double t) const;
  double map_estimate(std::uint32_t m, std::uint32_t n) const;
  double concentration_probability(std::uint32_t m, std::uint32_t n, double estimate,
                                   double delta) const;

 private:
  PosteriorModel(Measure measure, BetaParams prior) : measure_(measure), prior_(prior) {}

  Measure measure_;
  BetaParams prior_;
};

// ---------------------------------------------------------------------------

// minMatches(n) for n = k, 2k, ..., max_hashes: the smallest m with
// Pr[S >= t | m of n] >= epsilon, or n + 1 when no m qualifies.
class MinMatchTable {
 public:
  static MinMatchTable build(const PosteriorModel& posterior, double t, double epsilon,
                             std::size_t k, std::size_t max_hashes);

  std::uint32_t min_matches(std::size_t n) const;
  bool prunes(std::uint32_t m, std::uint32_t n) const { return m < min_matches(n); }

  std::size_t batch() const noexcept { return k_; }
  std::size_t max_hashes() const noexcept { return k_ * entries_.size(); }
  double threshold() const noexcept { return t_; }
  double epsilon() const noexcept { return epsilon_; }
  const std::vector<std::uint32_t>& entries() const noexcept { return entries_; }

  // `# n<TAB>min_matches` header, one row per table entry.
  void write_tsv(std::ostream& out) const;

 private:
  std::size_t k_ = 1;
  double t_ = 0.0;
  double epsilon_ = 0.0;
  std::vector<std::uint32_t> entries_;
};

struct Concentration {
  bool concentrated = false;
  double estimate = 0.0;

  friend bool operator==(const Concentration&, const Concentration&) = default;
};

// Memoized (MAP estimate, concentration >= 1 - gamma) keyed by (m, n).
// Lookups are safe from many threads; racing inserts of a key store the same
// deterministic value.
class ConcentrationCache {
 public:
  ConcentrationCache(PosteriorModel posterior, AccuracyParams accuracy, bool enabled = true);

  Concentration lookup(std::uint32_t m, std::uint32_t n) const;
  Concentration compute(std::uint32_t m, std::uint32_t n) const;
  std::size_t size() const;
  bool enabled() const noexcept { return enabled_; }
  const PosteriorModel& posterior() const noexcept { return posterior_; }
  const AccuracyParams& accuracy() const noexcept { return accuracy_; }

 private:
  PosteriorModel posterior_;
  AccuracyParams accuracy_;
  bool enabled_;
  mutable std::unique_ptr<std::shared_mutex> mu_;
  mutable std::unordered_map<std::uint64_t, Concentration> entries_;
};

Concentration concentration_lookup(const ConcentrationCache& cache, std::uint32_t m,
                                   std::uint32_t n);

// ---------------------------------------------------------------------------
// Posterior of the cosine collision rate under a power-law prior
// p(r) ∝ r^exponent on [0.5, 1], sampled on a uniform grid and
// trapezoid-normalized.

struct DensityPoint {
  double r = 0.0;
  double density = 0.0;
};

std::vector<DensityPoint> power_law_posterior_grid(double exponent, std::uint32_t m,
                                                   std::uint32_t n, std::size_t gridpoints);

// Largest pointwise density gap between two grids sampled at the same points.
double max_density_gap(std::span<const DensityPoint> a, std::span<const DensityPoint> b);

}  // namespace bayeslsh
