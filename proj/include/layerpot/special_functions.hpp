#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace layerpot {

/// Scaled complementary error function exp(x^2) erfc(x).
///
/// Uses the library erfc with a split exponent (x^2 = hi + lo exactly) where
/// exp(x^2) is representable, and the asymptotic series beyond that. Negative
/// arguments overflow for x < -26; callers of the overflow-safe paths only
/// pass x >= 0.
inline double erfcx(double x) {
  if (x < 26.0) {
    const double hi = x * x;
    const double lo = std::fma(x, x, -hi);
    return std::exp(hi) * std::erfc(x) * (1.0 + lo);
  }
  // erfcx(x) ~ 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 20; ++k) {
    term *= -(2.0 * k - 1.0) * inv2x2;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum * std::numbers::inv_sqrtpi / x;
}

/// e^{a} erfc(x), evaluated without forming e^{a} when x > 0 (the product is
/// then erfcx(x) e^{a - x^2}).
inline double exp_times_erfc(double a, double x) {
  if (x > 0.0) return erfcx(x) * std::exp(a - x * x);
  return std::exp(a) * std::erfc(x);
}

}  // namespace layerpot
