#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "distband/parallel.hpp"
#include "distband/rng.hpp"
#include "distband/samples.hpp"

namespace distband {

// Two-sample Kolmogorov-Smirnov baseline.
struct KsResult {
  double d = 0.0;        // max |F_x - F_y|
  double d_plus = 0.0;   // max (F_x - F_y)
  double d_minus = 0.0;  // max (F_y - F_x)
  double p_asymptotic = 1.0;
  std::optional<double> p_permutation;
};

namespace detail {

// Max signed ECDF gaps over pooled sorted values with group labels
// (0 = first group, 1 = second). Tie blocks are evaluated once, after all
// equal values are absorbed.
inline std::pair<double, double> ks_gaps(const std::vector<double>& pooled,
                                         const std::vector<std::uint8_t>& labels,
                                         int n_x, int n_y) {
  double d_plus = 0.0;
  double d_minus = 0.0;
  int k_x = 0;
  int k_y = 0;
  const std::size_t total = pooled.size();
  for (std::size_t i = 0; i < total; ++i) {
    if (labels[i] == 0) {
      ++k_x;
    } else {
      ++k_y;
    }
    if (i + 1 < total && pooled[i + 1] == pooled[i]) continue;
    const double diff = static_cast<double>(k_x) / n_x - static_cast<double>(k_y) / n_y;
    d_plus = std::max(d_plus, diff);
    d_minus = std::max(d_minus, -diff);
  }
  return {d_plus, d_minus};
}

inline void pooled_with_labels(const GroupedSamples& g, std::vector<double>& pooled,
                               std::vector<std::uint8_t>& labels) {
  pooled.clear();
  labels.clear();
  pooled.reserve(g.x.size() + g.y.size());
  labels.reserve(g.x.size() + g.y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < g.x.size() || j < g.y.size()) {
    if (j == g.y.size() || (i < g.x.size() && g.x[i] <= g.y[j])) {
      pooled.push_back(g.x[i++]);
      labels.push_back(0);
    } else {
      pooled.push_back(g.y[j++]);
      labels.push_back(1);
    }
  }
}

}  // namespace detail

inline KsResult ks_statistic(const GroupedSamples& g) {
  std::vector<double> pooled;
  std::vector<std::uint8_t> labels;
  detail::pooled_with_labels(g, pooled, labels);
  KsResult out;
  const auto [d_plus, d_minus] = detail::ks_gaps(pooled, labels, g.nx(), g.ny());
  out.d_plus = d_plus;
  out.d_minus = d_minus;
  out.d = std::max(d_plus, d_minus);
  return out;
}

// Standard limiting-distribution tail 2 sum_j (-1)^{j-1} exp(-2 j^2 lambda^2)
// at lambda = d sqrt(n_x n_y / (n_x + n_y)), truncated below 1e-12.
inline double ks_p_asymptotic(double d, int n_x, int n_y) {
  if (!(d >= 0.0 && d <= 1.0)) throw std::domain_error("ks_p_asymptotic: d outside [0, 1]");
  const double lambda =
      d * std::sqrt(static_cast<double>(n_x) * n_y / (static_cast<double>(n_x) + n_y));
  if (lambda < 1e-3) return 1.0;
  double total = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 1000; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    total += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * total, 0.0, 1.0);
}

// Monte Carlo permutation reference: the share of label shuffles whose KS
// statistic is at least the observed one (ties count).
inline double ks_p_permutation(const GroupedSamples& g, std::int64_t reps,
                               std::uint64_t seed) {
  if (reps < 1) throw std::domain_error("ks_p_permutation: reps must be >= 1");
  std::vector<double> pooled;
  std::vector<std::uint8_t> labels;
  detail::pooled_with_labels(g, pooled, labels);
  const auto [obs_plus, obs_minus] = detail::ks_gaps(pooled, labels, g.nx(), g.ny());
  const double d_obs = std::max(obs_plus, obs_minus);

  std::vector<std::uint8_t> hits(static_cast<std::size_t>(reps), 0);
  parallel_for(reps, [&](std::int64_t rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep));
    std::vector<std::uint8_t> shuffled = labels;
    rng.shuffle(shuffled);
    const auto [d_plus, d_minus] = detail::ks_gaps(pooled, shuffled, g.nx(), g.ny());
    hits[static_cast<std::size_t>(rep)] =
        std::max(d_plus, d_minus) >= d_obs - 1e-12 ? 1 : 0;
  });
  std::int64_t count = 0;
  for (const auto h : hits) count += h;
  return static_cast<double>(count) / static_cast<double>(reps);
}

}  // namespace distband
