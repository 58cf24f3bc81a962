// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

// Independent reference computations for tests. Nothing here calls into the
// library's numerical code.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include "bayeslsh/corpus.hpp"

namespace oracle {

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b,
                           double fa, double fm, double fb, double whole, double tol,
                           int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on [a, b], pre-split into `pieces` panels so narrow peaks
// are not missed by the first coarse estimate.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-14, int pieces = 64) {
  if (!(b > a)) return 0.0;
  double total = 0.0;
  const double h = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * h;
    const double hi = p + 1 == pieces ? b : lo + h;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fm, fhi, whole, tol / pieces, 48);
  }
  return total;
}

// Unnormalized log density of Beta(a, b), shifted by `shift`.
inline double beta_kernel(double x, double a, double b, double shift) {
  if (x <= 0.0 || x >= 1.0) {
    const double edge = x <= 0.0 ? (a == 1.0 ? 1.0 : 0.0) : (b == 1.0 ? 1.0 : 0.0);
    return edge * std::exp(-shift);
  }
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - shift);
}

// Log of the kernel at its maximum on [lo, hi]; used to keep integrands O(1).
inline double beta_kernel_log_peak(double a, double b, double lo, double hi) {
  double mode = (a > 1.0 && b > 1.0) ? (a - 1.0) / (a + b - 2.0) : (a >= b ? hi : lo);
  mode = std::clamp(mode, std::max(lo, 1e-300), std::min(hi, 1.0 - 1e-16));
  return (a - 1.0) * std::log(mode) + (b - 1.0) * std::log1p(-mode);
}

// Mass of Beta(a, b) on [lo, hi] by quadrature (a, b >= 1).
inline double beta_mass(double a, double b, double lo, double hi) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 1.0);
  if (!(hi > lo)) return 0.0;
  const double shift = beta_kernel_log_peak(a, b, 0.0, 1.0);
  auto f = [&](double x) { return beta_kernel(x, a, b, shift); };
  return integrate(f, lo, hi) / integrate(f, 0.0, 1.0);
}

inline double reg_inc_beta(double x, double a, double b) { return beta_mass(a, b, 0.0, x); }

// Posterior of the cosine collision rate: r^m (1 - r)^(n - m) on [0.5, 1].
inline double cosine_posterior_mass(std::uint32_t m, std::uint32_t n, double lo, double hi) {
  lo = std::max(lo, 0.5);
  hi = std::min(hi, 1.0);
  if (!(hi > lo)) return 0.0;
  const double a = m + 1.0;
  const double b = n - m + 1.0;
  const double shift = beta_kernel_log_peak(a, b, 0.5, 1.0);
  auto f = [&](double x) { return beta_kernel(x, a, b, shift); };
  return integrate(f, lo, hi) / integrate(f, 0.5, 1.0);
}

inline double r2c(double r) { return std::cos(std::numbers::pi * (1.0 - r)); }
inline double c2r(double s) { return 1.0 - std::acos(s) / std::numbers::pi; }

// Binomial(n, s) mass on integers [lo, hi] by direct log-space pmf summation.
inline double binomial_mass(std::int64_t n, double s, std::int64_t lo, std::int64_t hi) {
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min<std::int64_t>(hi, n);
  double total = 0.0;
  for (std::int64_t m = lo; m <= hi; ++m) {
    const double lp = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0) +
                      (m > 0 ? m * std::log(s) : 0.0) +
                      (n - m > 0 ? (n - m) * std::log1p(-s) : 0.0);
    total += std::exp(lp);
  }
  return total;
}

// Dense dot product of two sparse vectors through an ordered map.
inline double dense_dot(const bayeslsh::SparseVector& x, const bayeslsh::SparseVector& y) {
  std::map<std::uint32_t, double> dense;
  for (const auto& e : x.entries) dense[e.feature] += e.weight;
  double total = 0.0;
  for (const auto& e : y.entries) {
    const auto it = dense.find(e.feature);
    if (it != dense.end()) total += it->second * e.weight;
  }
  return total;
}

inline double set_jaccard(const bayeslsh::SparseVector& x, const bayeslsh::SparseVector& y) {
  std::vector<std::uint32_t> a;
  std::vector<std::uint32_t> b;
  for (const auto& e : x.entries) a.push_back(e.feature);
  for (const auto& e : y.entries) b.push_back(e.feature);
  std::vector<std::uint32_t> inter;
  std::vector<std::uint32_t> uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  return uni.empty() ? 0.0 : static_cast<double>(inter.size()) / uni.size();
}

}  // namespace oracle
