// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The BayesLSH Authors

#pragma once

namespace bayeslsh {

inline constexpr int kBetaMaxIterations = 300;
inline constexpr double kBetaTolerance = 1e-12;

// log B(a, b).
double log_beta_function(double a, double b);

// Natural logs of both tails of the regularized incomplete beta function:
// lower = log I_x(a, b), upper = log(1 - I_x(a, b)). The tail on the
// rapidly-converging side of the continued fraction is computed directly and
// the other by complement, so tiny tails keep full relative precision.
struct BetaLogTails {
  double lower;
  double upper;
};

BetaLogTails beta_log_tails(double x, double a, double b);

// Regularized I_x(a, b); x in [0, 1], a, b > 0. Throws NumericError when the
// continued fraction fails to converge within kBetaMaxIterations.
double reg_inc_beta(double x, double a, double b);

// Unregularized B_x(a, b) = I_x(a, b) * B(a, b).
double inc_beta(double x, double a, double b);

// log(I_hi(a, b) - I_lo(a, b)) for 0 <= lo <= hi <= 1, evaluated without
// catastrophic cancellation; -inf when the interval carries no mass.
double log_beta_mass(double a, double b, double lo, double hi);

}  // namespace bayeslsh
