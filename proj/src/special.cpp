// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#include "bayeslsh/special.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bayeslsh/error.hpp"

namespace bayeslsh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

// log(1 - exp(d)) for d <= 0.
double log1mexp(double d) {
  if (d >= 0.0) return -kInf;
  return d > -M_LN2 ? std::log(-std::expm1(d)) : std::log1p(-std::exp(d));
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIterations; ++m) {
    const double dm = m;
    const double m2 = 2.0 * dm;
    double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kBetaTolerance) return h;
  }
  throw NumericError(fmt::format(
      "incomplete beta continued fraction did not converge in {} iterations "
      "(x={}, a={}, b={})",
      kBetaMaxIterations, x, a, b));
}

void check_args(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ContractViolation(fmt::format("incomplete beta needs a, b > 0 (a={}, b={})", a, b));
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ContractViolation(fmt::format("incomplete beta needs x in [0, 1], got {}", x));
  }
}

}  // namespace

double log_beta_function(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

BetaLogTails beta_log_tails(double x, double a, double b) {
  check_args(x, a, b);
  if (x == 0.0) return {-kInf, 0.0};
  if (x == 1.0) return {0.0, -kInf};
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - log_beta_function(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = log_front + std::log(beta_continued_fraction(x, a, b) / a);
    return {lower, log1mexp(lower)};
  }
  const double upper = log_front + std::log(beta_continued_fraction(1.0 - x, b, a) / b);
  return {log1mexp(upper), upper};
}

double reg_inc_beta(double x, double a, double b) {
  return std::exp(beta_log_tails(x, a, b).lower);
}

double inc_beta(double x, double a, double b) {
  const auto tails = beta_log_tails(x, a, b);
  return std::exp(tails.lower + log_beta_function(a, b));
}

double log_beta_mass(double a, double b, double lo, double hi) {
  if (lo < 0.0) lo = 0.0;
  if (hi > 1.0) hi = 1.0;
  if (!(lo < hi)) return -kInf;
  if (lo == 0.0 && hi == 1.0) return 0.0;
  if (lo == 0.0) return beta_log_tails(hi, a, b).lower;
  if (hi == 1.0) return beta_log_tails(lo, a, b).upper;
  const auto tl = beta_log_tails(lo, a, b);
  const auto th = beta_log_tails(hi, a, b);
  const double outside = std::exp(tl.lower) + std::exp(th.upper);
  if (outside <= 0.5) return std::log1p(-outside);
  // Both endpoints in the same tail: difference of the smaller tails.
  if (th.lower <= tl.upper) return th.lower + log1mexp(tl.lower - th.lower);
  return tl.upper + log1mexp(th.upper - tl.upper);
}

}  // namespace bayeslsh
