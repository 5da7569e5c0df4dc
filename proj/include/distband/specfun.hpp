#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace distband {

// Parameters of the Beta(k, n+1-k) law followed by the CDF value of the k-th
// order statistic in a sample of n. k = 0 and k = n+1 are the degenerate
// boundary conventions that pin band envelopes at 0 and 1.
struct BetaParams {
  int k = 0;
  int n = 1;
};

// Natural log of the gamma function for x > 0. Upward recurrence into the
// region z >= 12 where the Stirling series with eight Bernoulli terms is
// already below double rounding noise.
inline double log_gamma(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw std::domain_error("log_gamma: requires finite x > 0, got " +
                            std::to_string(x));
  }
  double shift = 0.0;
  double z = x;
  while (z < 12.0) {
    shift += std::log(z);
    z += 1.0;
  }
  const double zi = 1.0 / z;
  const double zi2 = zi * zi;
  // B_{2m} / (2m (2m-1)) for m = 1..8
  constexpr double c1 = 1.0 / 12.0;
  constexpr double c2 = -1.0 / 360.0;
  constexpr double c3 = 1.0 / 1260.0;
  constexpr double c4 = -1.0 / 1680.0;
  constexpr double c5 = 1.0 / 1188.0;
  constexpr double c6 = -691.0 / 360360.0;
  constexpr double c7 = 1.0 / 156.0;
  constexpr double c8 = -3617.0 / 122400.0;
  const double series =
      zi * (c1 + zi2 * (c2 + zi2 * (c3 + zi2 * (c4 + zi2 * (c5 + zi2 * (c6 + zi2 * (c7 + zi2 * c8)))))));
  constexpr double half_log_two_pi = 0.91893853320467274178;
  return (z - 0.5) * std::log(z) - z + half_log_two_pi + series - shift;
}

inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta, modified Lentz scheme.
// Converges for x below the symmetry switch point.
inline double inc_beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  constexpr int max_iter = 300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= eps) break;
  }
  return h;
}

// Rational approximation to the standard normal quantile (Acklam). Only used
// to seed the beta quantile Newton iteration, so ~1e-9 accuracy is plenty.
inline double normal_quantile(double p) {
  constexpr double a1 = -3.969683028665376e+01, a2 = 2.209460984245205e+02,
                   a3 = -2.759285104469687e+02, a4 = 1.383577518672690e+02,
                   a5 = -3.066479806614716e+01, a6 = 2.506628277459239e+00;
  constexpr double b1 = -5.447609879822406e+01, b2 = 1.615858368580409e+02,
                   b3 = -1.556989798598866e+02, b4 = 6.680131188771972e+01,
                   b5 = -1.328068155288572e+01;
  constexpr double c1 = -7.784894002430293e-03, c2 = -3.223964580411365e-01,
                   c3 = -2.400758277161838e+00, c4 = -2.549732539343734e+00,
                   c5 = 4.374664141464968e+00, c6 = 2.938163982698783e+00;
  constexpr double d1 = 7.784695709041462e-03, d2 = 3.224671290700398e-01,
                   d3 = 2.445134137142996e+00, d4 = 3.754408661907416e+00;
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) /
           ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a1 * r + a2) * r + a3) * r + a4) * r + a5) * r + a6) * q /
           (((((b1 * r + b2) * r + b3) * r + b4) * r + b5) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log1p(-p));
  return -(((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) /
         ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0);
}

}  // namespace detail

// Regularized incomplete beta I_x(a,b), exact at the endpoints.
inline double reg_inc_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0) ||
      !std::isfinite(a) || !std::isfinite(b)) {
    throw std::domain_error("reg_inc_beta: requires 0 <= x <= 1 and finite a, b > 0");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < a / (a + b)) {
    return std::exp(log_front) * detail::inc_beta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(log_front) * detail::inc_beta_cf(1.0 - x, b, a) / b;
}

// p-quantile of Beta(k, n+1-k), with the boundary conventions k = 0 -> 0 and
// k = n+1 -> 1 for any p. Safeguarded Newton from a normal-approximation
// start, falling back to bisection whenever a step leaves the bracket.
inline double beta_quantile(double p, BetaParams params) {
  const int k = params.k;
  const int n = params.n;
  if (n < 1 || k < 0 || k > n + 1) {
    throw std::domain_error("beta_quantile: requires 1 <= n and 0 <= k <= n+1");
  }
  if (k == 0) return 0.0;
  if (k == n + 1) return 1.0;
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("beta_quantile: requires 0 < p < 1");
  }
  const double a = static_cast<double>(k);
  const double b = static_cast<double>(n + 1 - k);
  const double mean = a / (a + b);
  const double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
  double x = mean + sd * detail::normal_quantile(p);
  if (!(x >= 1e-12)) x = 1e-12;
  if (!(x <= 1.0 - 1e-12)) x = 1.0 - 1e-12;

  const double lnB = log_beta(a, b);
  const double tol = 1e-14 + 1e-13 * p;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double f = reg_inc_beta(x, a, b) - p;
    if (std::fabs(f) <= tol) break;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double pdf = std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lnB);
    double next = x - f / pdf;
    if (!std::isfinite(next) || !(next > lo) || !(next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (next == x) break;
    x = next;
  }
  return x;
}

}  // namespace distband
