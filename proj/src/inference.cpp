// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include "bayeslsh/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "bayeslsh/error.hpp"
#include "bayeslsh/special.hpp"

namespace bayeslsh {

namespace {

void check_unit_open(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw UsageError(fmt::format("{} must lie in (0, 1), got {}", name, v));
  }
}

void check_counts(std::uint32_t m, std::uint32_t n) {
  if (m > n) throw ContractViolation(fmt::format("match count {} exceeds hash count {}", m, n));
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double log_choose(std::size_t n, std::size_t k) {
  int sign = 0;
  return ::lgamma_r(static_cast<double>(n) + 1.0, &sign) -
         ::lgamma_r(static_cast<double>(k) + 1.0, &sign) -
         ::lgamma_r(static_cast<double>(n - k) + 1.0, &sign);
}

// Guards the summation limits against representation error such as
// (0.5 - 0.05) * 100 = 45.000000000000007.
constexpr double kLimitSlack = 1e-9;

}  // namespace

void AccuracyParams::validate() const {
  check_unit_open(delta, "delta");
  check_unit_open(gamma, "gamma");
}

void RecallParam::validate() const { check_unit_open(epsilon, "epsilon"); }

void BetaParams::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw ContractViolation(
        fmt::format("Beta prior needs finite alpha, beta > 0 (got {}, {})", alpha, beta));
  }
}

// ---------------------------------------------------------------------------

double ml_estimate(std::uint32_t m, std::uint32_t n, Measure measure) {
  if (n == 0) throw ContractViolation("ml_estimate needs n >= 1");
  check_counts(m, n);
  const double rate = static_cast<double>(m) / static_cast<double>(n);
  return measure == Measure::kCosine ? r2c(std::max(rate, 0.5)) : rate;
}

double ml_concentration_prob(double s, std::size_t n, double delta, BoundRounding rounding) {
  check_unit_open(s, "similarity");
  if (n == 0) throw ContractViolation("ml_concentration_prob needs n >= 1");
  if (!(delta > 0.0)) throw UsageError("delta must be positive");
  const double nd = static_cast<double>(n);
  const bool inward = rounding == BoundRounding::kInward;
  const double lo_raw = inward ? std::ceil((s - delta) * nd - kLimitSlack)
                               : std::floor((s - delta) * nd + kLimitSlack);
  const double hi_raw = inward ? std::floor((s + delta) * nd + kLimitSlack)
                               : std::ceil((s + delta) * nd - kLimitSlack);
  if (hi_raw < 0.0 || lo_raw > nd) return 0.0;
  const auto lo = static_cast<std::size_t>(std::max(0.0, lo_raw));
  const auto hi = static_cast<std::size_t>(std::min(nd, hi_raw));
  if (lo > hi) return 0.0;
  if (lo == 0 && hi == n) return 1.0;
  const double ls = std::log(s);
  const double l1s = std::log1p(-s);
  double total = 0.0;
  for (std::size_t m = lo; m <= hi; ++m) {
    total += std::exp(log_choose(n, m) + static_cast<double>(m) * ls +
                      static_cast<double>(n - m) * l1s);
  }
  return clamp01(total);
}

std::size_t required_hashes(double s, double delta, double gamma,
                            const RequiredHashesOptions& options) {
  check_unit_open(s, "similarity");
  check_unit_open(delta, "delta");
  check_unit_open(gamma, "gamma");
  if (options.step == 0) throw UsageError("required_hashes scan step must be >= 1");
  for (std::size_t n = options.step; n <= options.limit; n += options.step) {
    if (ml_concentration_prob(s, n, delta, options.rounding) >= 1.0 - gamma) return n;
  }
  throw GuardError(
      fmt::format("no n <= {} reaches the requested concentration", options.limit));
}

BetaParams fit_beta_mom(std::span<const double> samples, std::size_t min_samples) {
  const BetaParams fallback{1.0, 1.0};
  if (samples.empty() || samples.size() < min_samples) return fallback;
  double mean = 0.0;
  for (double s : samples) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ContractViolation(fmt::format("similarity sample {} outside [0, 1]", s));
    }
    mean += s;
  }
  const double r = static_cast<double>(samples.size());
  mean /= r;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= r;
  // A (numerically) constant sample has no Beta fit.
  if (var <= 1e-12 * mean * (1.0 - mean)) return fallback;
  const double factor = mean * (1.0 - mean) / var - 1.0;
  const BetaParams fit{mean * factor, (1.0 - mean) * factor};
  if (!(fit.alpha > 0.0) || !(fit.beta > 0.0) || !std::isfinite(fit.alpha) ||
      !std::isfinite(fit.beta)) {
    return fallback;
  }
  return fit;
}

// ---------------------------------------------------------------------------

double r2c(double r) {
  r = std::clamp(r, 0.5, 1.0);
  // sin form is exact at r = 0.5 and r = 1.
  return std::clamp(std::sin(std::numbers::pi * (r - 0.5)), 0.0, 1.0);
}

double c2r(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return 1.0 - std::acos(s) / std::numbers::pi;
}

double jaccard_prune_prob(const BetaParams& prior, std::uint32_t m, std::uint32_t n,
                          double t) {
  check_counts(m, n);
  check_unit_open(t, "threshold");
  prior.validate();
  const double a = m + prior.alpha;
  const double b = (n - m) + prior.beta;
  return clamp01(std::exp(log_beta_mass(a, b, t, 1.0)));
}

double jaccard_map(const BetaParams& prior, std::uint32_t m, std::uint32_t n) {
  check_counts(m, n);
  prior.validate();
  const double a = m + prior.alpha;
  const double b = (n - m) + prior.beta;
  if (a > 1.0 && b > 1.0) return (a - 1.0) / (a + b - 2.0);
  if (a <= 1.0 && b <= 1.0) return a > b ? 1.0 : (a < b ? 0.0 : 0.5);
  return a <= 1.0 ? 0.0 : 1.0;
}

double jaccard_concentration_prob(const BetaParams& prior, std::uint32_t m, std::uint32_t n,
                                  double estimate, double delta) {
  check_counts(m, n);
  prior.validate();
  if (!(delta > 0.0)) throw UsageError("delta must be positive");
  const double a = m + prior.alpha;
  const double b = (n - m) + prior.beta;
  return clamp01(std::exp(log_beta_mass(a, b, estimate - delta, estimate + delta)));
}

double cosine_prune_prob(std::uint32_t m, std::uint32_t n, double t) {
  check_counts(m, n);
  check_unit_open(t, "threshold");
  const double a = m + 1.0;
  const double b = (n - m) + 1.0;
  const double support = log_beta_mass(a, b, 0.5, 1.0);
  return clamp01(std::exp(log_beta_mass(a, b, c2r(t), 1.0) - support));
}

double cosine_map(std::uint32_t m, std::uint32_t n) {
  if (n == 0) throw ContractViolation("cosine_map needs n >= 1");
  check_counts(m, n);
  const double r = std::max(static_cast<double>(m) / static_cast<double>(n), 0.5);
  return r2c(r);
}

double cosine_concentration_prob(std::uint32_t m, std::uint32_t n, double estimate,
                                 double delta) {
  check_counts(m, n);
  if (!(delta > 0.0)) throw UsageError("delta must be positive");
  const double lo = estimate - delta <= 0.0 ? 0.5 : c2r(estimate - delta);
  const double hi = estimate + delta >= 1.0 ? 1.0 : c2r(estimate + delta);
  if (lo <= 0.5 && hi >= 1.0) return 1.0;
  const double a = m + 1.0;
  const double b = (n - m) + 1.0;
  const double support = log_beta_mass(a, b, 0.5, 1.0);
  return clamp01(std::exp(log_beta_mass(a, b, lo, hi) - support));
}

PosteriorModel PosteriorModel::jaccard(BetaParams prior) {
  prior.validate();
  return PosteriorModel(Measure::kJaccard, prior);
}

PosteriorModel PosteriorModel::cosine() { return PosteriorModel(Measure::kCosine, {}); }

double PosteriorModel::prune_probability(std::uint32_t m, std::uint32_t n, double t) const {
  return measure_ == Measure::kCosine ? cosine_prune_prob(m, n, t)
                                      : jaccard_prune_prob(prior_, m, n, t);
}

double PosteriorModel::map_estimate(std::uint32_t m, std::uint32_t n) const {
  return measure_ == Measure::kCosine ? cosine_map(m, n) : jaccard_map(prior_, m, n);
}

double PosteriorModel::concentration_probability(std::uint32_t m, std::uint32_t n,
                                                 double estimate, double delta) const {
  return measure_ == Measure::kCosine
             ? cosine_concentration_prob(m, n, estimate, delta)
             : jaccard_concentration_prob(prior_, m, n, estimate, delta);
}

// ---------------------------------------------------------------------------

MinMatchTable MinMatchTable::build(const PosteriorModel& posterior, double t, double epsilon,
                                   std::size_t k, std::size_t max_hashes) {
  check_unit_open(t, "threshold");
  check_unit_open(epsilon, "epsilon");
  if (k == 0) throw UsageError("batch size k must be >= 1");
  if (max_hashes % k != 0) {
    throw UsageError(fmt::format("max hashes {} is not a multiple of k = {}", max_hashes, k));
  }
  MinMatchTable table;
  table.k_ = k;
  table.t_ = t;
  table.epsilon_ = epsilon;
  table.entries_.reserve(max_hashes / k);
  for (std::size_t n = k; n <= max_hashes; n += k) {
    const auto nn = static_cast<std::uint32_t>(n);
    // Smallest m in [0, n] passing the test; n + 1 if none does.
    std::uint32_t lo = 0;
    std::uint32_t hi = nn + 1;
    while (lo < hi) {
      const std::uint32_t mid = lo + (hi - lo) / 2;
      if (posterior.prune_probability(mid, nn, t) >= epsilon) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    table.entries_.push_back(lo);
  }
  return table;
}

std::uint32_t MinMatchTable::min_matches(std::size_t n) const {
  if (n == 0 || n % k_ != 0 || n / k_ > entries_.size()) {
    throw ContractViolation(
        fmt::format("minMatches queried at n = {} (k = {}, max = {})", n, k_, max_hashes()));
  }
  return entries_[n / k_ - 1];
}

void MinMatchTable::write_tsv(std::ostream& out) const {
  out << fmt::format("# t={} epsilon={} k={}\n", t_, epsilon_, k_);
  out << "# n\tmin_matches\n";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out << fmt::format("{}\t{}\n", (i + 1) * k_, entries_[i]);
  }
}

// ---------------------------------------------------------------------------

ConcentrationCache::ConcentrationCache(PosteriorModel posterior, AccuracyParams accuracy,
                                       bool enabled)
    : posterior_(posterior),
      accuracy_(accuracy),
      enabled_(enabled),
      mu_(std::make_unique<std::shared_mutex>()) {
  accuracy_.validate();
}

Concentration ConcentrationCache::compute(std::uint32_t m, std::uint32_t n) const {
  const double estimate = posterior_.map_estimate(m, n);
  const double p = posterior_.concentration_probability(m, n, estimate, accuracy_.delta);
  return {p >= 1.0 - accuracy_.gamma, estimate};
}

Concentration ConcentrationCache::lookup(std::uint32_t m, std::uint32_t n) const {
  if (!enabled_) return compute(m, n);
  const std::uint64_t key = (static_cast<std::uint64_t>(n) << 32) | m;
  {
    std::shared_lock lock(*mu_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  const Concentration value = compute(m, n);
  std::unique_lock lock(*mu_);
  entries_.emplace(key, value);
  return value;
}

std::size_t ConcentrationCache::size() const {
  std::shared_lock lock(*mu_);
  return entries_.size();
}

Concentration concentration_lookup(const ConcentrationCache& cache, std::uint32_t m,
                                   std::uint32_t n) {
  return cache.lookup(m, n);
}

// ---------------------------------------------------------------------------

std::vector<DensityPoint> power_law_posterior_grid(double exponent, std::uint32_t m,
                                                   std::uint32_t n, std::size_t gridpoints) {
  check_counts(m, n);
  if (gridpoints < 2) throw UsageError("posterior grid needs at least 2 points");
  if (!std::isfinite(exponent)) throw UsageError("prior exponent must be finite");
  std::vector<DensityPoint> grid(gridpoints);
  const double h = 0.5 / static_cast<double>(gridpoints - 1);
  const double up = static_cast<double>(m) + exponent;
  const double down = static_cast<double>(n - m);
  std::vector<double> logd(gridpoints);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gridpoints; ++i) {
    const double r = i + 1 == gridpoints ? 1.0 : 0.5 + h * static_cast<double>(i);
    grid[i].r = r;
    double l = up * std::log(r);
    if (down > 0.0) l += down * std::log1p(-r);  // -inf at r = 1
    logd[i] = l;
    peak = std::max(peak, l);
  }
  double area = 0.0;
  for (std::size_t i = 0; i < gridpoints; ++i) {
    grid[i].density = std::exp(logd[i] - peak);
    const double w = (i == 0 || i + 1 == gridpoints) ? 0.5 : 1.0;
    area += w * grid[i].density;
  }
  area *= h;
  for (auto& p : grid) p.density /= area;
  return grid;
}

double max_density_gap(std::span<const DensityPoint> a, std::span<const DensityPoint> b) {
  if (a.size() != b.size()) throw ContractViolation("density grids differ in size");
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i].density - b[i].density));
  return gap;
}

}  // namespace bayeslsh
