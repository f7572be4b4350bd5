#pragma once

#include <cmath>

namespace ordlatent {

// Logistic function split on the sign of x so exp() never overflows.
inline double logistic(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) noexcept {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

/// log(logistic(x)).
inline double log_logistic(double x) noexcept { return -softplus(-x); }

inline double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile; p must lie in (0, 1).
double normal_quantile(double p);

inline double normal_pdf(double x) noexcept {
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

}  // namespace ordlatent
