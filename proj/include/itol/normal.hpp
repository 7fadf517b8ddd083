#pragma once

// Standard normal distribution helpers.
//
// The CDF is evaluated through the complementary error function of the C++
// standard library, Phi(x) = erfc(-x / sqrt(2)) / 2, which is accurate to a
// few ulps over the whole real line (including the far tails, where
// 1 - erf(x) would cancel). The quantile inverts it with Boost.Math's
// erfc_inv, which is accurate to double precision.

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "itol/errors.hpp"

namespace itol::normal {

inline double cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Upper tail P(Z > x), computed without cancellation for large x.
inline double upper_tail(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// Inverse of cdf(). p must lie strictly inside (0, 1).
inline double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("normal quantile: probability must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace itol::normal
