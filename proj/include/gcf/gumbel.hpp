// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#pragma once

#include <cmath>
#include <limits>

#include "gcf/random.hpp"

namespace gcf {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow. Either argument may be -inf.
inline double logaddexp(double a, double b) {
  if (a == -kInfinity) return b;
  if (b == -kInfinity) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

/// Standard Gumbel draw, -log(-log(u)) with u on the open interval (0, 1).
double sample_standard_gumbel(RandomStream& rng);

/// log P(G <= x) for G ~ Gumbel(location, 1).
inline double gumbel_log_cdf(double x, double location = 0.0) {
  return -std::exp(-(x - location));
}

inline double gumbel_cdf(double x, double location = 0.0) {
  return std::exp(gumbel_log_cdf(x, location));
}

/// Draw from Gumbel(location, 1) conditioned on the value being <= bound.
///
/// `bound` may be +inf, in which case this is an unconditional draw. The
/// result never exceeds `bound`, for every finite input.
double sample_truncated_gumbel(double location, double bound, RandomStream& rng);

/// Deterministic kernel of sample_truncated_gumbel: maps an unconditional
/// Gumbel(location) draw `g` to the truncated draw. Monotone in both
/// arguments.
inline double truncate_gumbel(double g, double bound) {
  if (bound == kInfinity) return g;
  return -logaddexp(-bound, -g);
}

}  // namespace gcf
