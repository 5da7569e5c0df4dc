#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "distband/specfun.hpp"

namespace distband {

// Uniform confidence band for one sample, tabulated by ECDF count rather than
// by value: the pointwise decision at r depends only on how many observations
// lie at or below r, so one table of size n+1 serves every evaluation point
// and every Monte Carlo replicate.
struct BandSpec {
  int n = 0;
  double alpha_tilde = 0.0;
  std::vector<double> lower_at_count;  // [k] = alpha_tilde-quantile of Beta(k, n+1-k)
  std::vector<double> upper_at_count;  // [k] = (1-alpha_tilde)-quantile of Beta(k+1, n-k)
};

inline BandSpec build_band(int n, double alpha_tilde) {
  if (n < 1) throw std::domain_error("build_band: requires n >= 1");
  if (!(alpha_tilde > 0.0 && alpha_tilde < 0.5)) {
    throw std::domain_error("build_band: alpha_tilde must lie in (0, 0.5)");
  }
  BandSpec band;
  band.n = n;
  band.alpha_tilde = alpha_tilde;
  band.lower_at_count.resize(n + 1);
  band.upper_at_count.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    band.lower_at_count[k] = beta_quantile(alpha_tilde, {k, n});
    band.upper_at_count[k] = beta_quantile(1.0 - alpha_tilde, {k + 1, n});
  }
  return band;
}

inline std::pair<double, double> band_at(const BandSpec& band, int count) {
  if (count < 0 || count > band.n) {
    throw std::domain_error("band_at: count out of range");
  }
  return {band.lower_at_count[count], band.upper_at_count[count]};
}

}  // namespace distband
