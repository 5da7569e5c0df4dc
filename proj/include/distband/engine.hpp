#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "distband/samples.hpp"
#include "distband/specfun.hpp"

namespace distband {

// Counts of observations at or below an evaluation point.
struct CountPair {
  int k_x = 0;
  int k_y = 0;
};

// Sentinel for points/replicates whose bands never separate below 0.5.
// Crossing thresholds live in (0, 0.5), so the sentinel sorts after them.
inline constexpr double kNoCrossing = 0.5;

// Global statistic: the smallest pointwise tuning level at which the two
// bands separate anywhere on the pooled grid.
struct GlobalStat {
  std::optional<double> t_obs;
  double argmin_point = std::numeric_limits<double>::quiet_NaN();
  int n_x = 0;
  int n_y = 0;
};

// Disjoint ascending value ranges where pointwise CDF equality is rejected.
// Endpoints are observed data values delimiting each rejected run; whether the
// true rejected region extends toward the next unobserved point is not
// resolved here.
struct RejectionRanges {
  std::vector<std::pair<double, double>> ranges;

  bool empty() const { return ranges.empty(); }
};

namespace detail {

// True when the lower envelope of group 1 lies strictly above the upper
// envelope of group 2 at tuning level a, i.e. B^a_{k1,n1} > B^{1-a}_{k2+1,n2}.
// Evaluated through one quantile and one CDF call: with u the upper envelope,
// the inequality holds iff I_u(k1, n1+1-k1) < a.
inline bool band_crosses_at(double a, int k1, int n1, int k2, int n2, double margin = 0.0) {
  const double upper = beta_quantile(1.0 - a, {k2 + 1, n2});
  return reg_inc_beta(upper, k1, n1 + 1.0 - k1) < a - margin;
}

// Root of the one-directional crossing function on (0, 0.5), or nullopt when
// that direction never crosses strictly inside the interval. The returned
// level is the first level at which rejection holds, to within ~1e-13.
inline std::optional<double> one_sided_crossing_root(int k1, int n1, int k2, int n2) {
  if (k1 < 1 || k2 >= n2) return std::nullopt;  // envelope pinned at 0 or 1
  // Gate at the open right endpoint with a small margin so configurations
  // whose crossing sits exactly at 0.5 (e.g. n_x = n_y = 1) resolve to "no
  // crossing" instead of flapping on rounding noise.
  if (!band_crosses_at(0.5, k1, n1, k2, n2, 1e-12)) return std::nullopt;
  double lo = 0.0;
  double hi = 0.5;
  for (int it = 0; it < 46; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (band_crosses_at(mid, k1, n1, k2, n2)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace detail

// Smallest tuning level in (0, 0.5) at which either one-directional band
// crossing occurs at a point with these counts, or nullopt when neither
// direction ever crosses.
inline std::optional<double> crossing_alpha(CountPair c, int n_x, int n_y) {
  if (n_x < 1 || n_y < 1 || c.k_x < 0 || c.k_x > n_x || c.k_y < 0 || c.k_y > n_y) {
    throw std::domain_error("crossing_alpha: counts out of range");
  }
  const auto root_xy = detail::one_sided_crossing_root(c.k_x, n_x, c.k_y, n_y);
  const auto root_yx = detail::one_sided_crossing_root(c.k_y, n_y, c.k_x, n_x);
  if (!root_xy) return root_yx;
  if (!root_yx) return root_xy;
  return std::min(*root_xy, *root_yx);
}

// Memoized crossing thresholds for one (n_x, n_y) pair, shared across grid
// points, Monte Carlo replicates, and threads. Cells hold kNoCrossing for
// never-crossing pairs and NaN while unfilled; concurrent duplicate
// computation is benign because every computation of a cell yields the same
// value.
class CrossingTable {
 public:
  CrossingTable(int n_x, int n_y)
      : n_x_(n_x),
        n_y_(n_y),
        cells_(std::make_unique<std::atomic<double>[]>(
            static_cast<std::size_t>(n_x + 1) * static_cast<std::size_t>(n_y + 1))) {
    if (n_x < 1 || n_y < 1) throw std::domain_error("CrossingTable: sizes must be >= 1");
    const std::size_t total = static_cast<std::size_t>(n_x + 1) * static_cast<std::size_t>(n_y + 1);
    for (std::size_t i = 0; i < total; ++i) {
      cells_[i].store(std::numeric_limits<double>::quiet_NaN(), std::memory_order_relaxed);
    }
  }

  int n_x() const { return n_x_; }
  int n_y() const { return n_y_; }

  // Threshold with kNoCrossing standing in for "never crosses".
  double threshold(CountPair c) const {
    auto& cell = cells_[static_cast<std::size_t>(c.k_x) * (n_y_ + 1) + c.k_y];
    double value = cell.load(std::memory_order_relaxed);
    if (std::isnan(value)) {
      const auto root = crossing_alpha(c, n_x_, n_y_);
      value = root ? *root : kNoCrossing;
      cell.store(value, std::memory_order_relaxed);
    }
    return value;
  }

 private:
  int n_x_;
  int n_y_;
  mutable std::unique_ptr<std::atomic<double>[]> cells_;
};

// Statistic of one pooled label arrangement (0 = first group, 1 = second),
// walking counts along the pooled order. Returns kNoCrossing when no position
// ever crosses.
inline double arrangement_statistic(const std::vector<std::uint8_t>& labels,
                                    const CrossingTable& table) {
  int k_x = 0;
  int k_y = 0;
  double best = kNoCrossing;
  for (const auto label : labels) {
    if (label == 0) {
      ++k_x;
    } else {
      ++k_y;
    }
    const double t = table.threshold({k_x, k_y});
    if (t < best) best = t;
  }
  return best;
}

inline GlobalStat global_statistic(const GroupedSamples& g, const CrossingTable& table) {
  GlobalStat stat;
  stat.n_x = g.nx();
  stat.n_y = g.ny();
  double best = kNoCrossing;
  double best_point = std::numeric_limits<double>::quiet_NaN();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < g.x.size() || j < g.y.size()) {
    double r;
    if (j == g.y.size() || (i < g.x.size() && g.x[i] <= g.y[j])) {
      r = g.x[i];
    } else {
      r = g.y[j];
    }
    while (i < g.x.size() && g.x[i] <= r) ++i;
    while (j < g.y.size() && g.y[j] <= r) ++j;
    const double t = table.threshold({static_cast<int>(i), static_cast<int>(j)});
    if (t < best) {
      best = t;
      best_point = r;
    }
  }
  if (best < kNoCrossing) {
    stat.t_obs = best;
    stat.argmin_point = best_point;
  }
  return stat;
}

inline GlobalStat global_statistic(const GroupedSamples& g) {
  const CrossingTable table(g.nx(), g.ny());
  return global_statistic(g, table);
}

// A grid point is rejected iff its crossing threshold is <= alpha_tilde;
// maximal runs of consecutive rejected grid points are merged and reported as
// (first observed value of run, last observed value of run).
inline RejectionRanges rejected_ranges(const GroupedSamples& g, double alpha_tilde,
                                       const CrossingTable& table) {
  if (!(alpha_tilde > 0.0 && alpha_tilde < 0.5)) {
    throw std::domain_error("rejected_ranges: alpha_tilde must lie in (0, 0.5)");
  }
  RejectionRanges out;
  bool in_run = false;
  double run_from = 0.0;
  double run_to = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < g.x.size() || j < g.y.size()) {
    double r;
    if (j == g.y.size() || (i < g.x.size() && g.x[i] <= g.y[j])) {
      r = g.x[i];
    } else {
      r = g.y[j];
    }
    while (i < g.x.size() && g.x[i] <= r) ++i;
    while (j < g.y.size() && g.y[j] <= r) ++j;
    const double t = table.threshold({static_cast<int>(i), static_cast<int>(j)});
    if (t <= alpha_tilde) {
      if (!in_run) {
        in_run = true;
        run_from = r;
      }
      run_to = r;
    } else if (in_run) {
      out.ranges.emplace_back(run_from, run_to);
      in_run = false;
    }
  }
  if (in_run) out.ranges.emplace_back(run_from, run_to);
  return out;
}

inline RejectionRanges rejected_ranges(const GroupedSamples& g, double alpha_tilde) {
  const CrossingTable table(g.nx(), g.ny());
  return rejected_ranges(g, alpha_tilde, table);
}

}  // namespace distband
