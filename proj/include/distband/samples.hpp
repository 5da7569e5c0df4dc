#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace distband {

// The two cleaned groups. Values are sorted ascending and finite; group
// order follows ascending label order (numeric when both labels parse as
// numbers, lexicographic otherwise) so "first group" is unambiguous.
struct GroupedSamples {
  std::vector<double> x;
  std::vector<double> y;
  std::string label_x;
  std::string label_y;
  std::int64_t n_dropped = 0;

  int nx() const { return static_cast<int>(x.size()); }
  int ny() const { return static_cast<int>(y.size()); }
};

// Right-continuous empirical CDF over sorted distinct jump points.
struct StepCdf {
  std::vector<double> jump_points;
  std::vector<int> cum_counts;  // observations <= jump_points[i]
  int n = 0;

  int count_at(double r) const {
    const auto it = std::upper_bound(jump_points.begin(), jump_points.end(), r);
    if (it == jump_points.begin()) return 0;
    return cum_counts[static_cast<std::size_t>(it - jump_points.begin()) - 1];
  }
  double value_at(double r) const {
    return static_cast<double>(count_at(r)) / static_cast<double>(n);
  }
};

struct TieReport {
  std::int64_t cross_tie_count = 0;  // distinct values observed in both groups
  std::pair<std::int64_t, std::int64_t> within_tie_counts{0, 0};
};

struct LabeledValue {
  std::optional<double> value;
  std::string group;
};

namespace detail {

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::int64_t duplicate_count(const std::vector<double>& sorted) {
  std::int64_t dups = 0;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) ++dups;
  }
  return dups;
}

}  // namespace detail

// Splits labeled rows into exactly two sorted groups, dropping (and counting)
// rows with missing or non-finite values or an empty group label.
inline GroupedSamples load_grouped(const std::vector<LabeledValue>& rows) {
  std::map<std::string, std::vector<double>> groups;
  std::int64_t dropped = 0;
  for (const auto& row : rows) {
    if (!row.value.has_value() || !std::isfinite(*row.value) || row.group.empty()) {
      ++dropped;
      continue;
    }
    groups[row.group].push_back(*row.value);
  }
  if (groups.size() != 2) {
    throw std::runtime_error("group variable not binary: found " +
                             std::to_string(groups.size()) +
                             " distinct group(s) with usable values");
  }
  auto first = groups.begin();
  auto second = std::next(first);
  const auto na = detail::parse_number(first->first);
  const auto nb = detail::parse_number(second->first);
  bool swap_order = false;
  if (na && nb && *na != *nb) {
    swap_order = *nb < *na;
  }  // map iteration is already lexicographic ascending
  if (swap_order) std::swap(first, second);

  GroupedSamples g;
  g.label_x = first->first;
  g.label_y = second->first;
  g.x = std::move(first->second);
  g.y = std::move(second->second);
  g.n_dropped = dropped;
  std::sort(g.x.begin(), g.x.end());
  std::sort(g.y.begin(), g.y.end());
  return g;
}

// Builds the ECDF of an already-sorted, finite, non-empty sample.
inline StepCdf ecdf(const std::vector<double>& sorted_values) {
  if (sorted_values.empty()) throw std::invalid_argument("ecdf: empty sample");
  StepCdf cdf;
  cdf.n = static_cast<int>(sorted_values.size());
  for (std::size_t i = 0; i < sorted_values.size(); ++i) {
    const double v = sorted_values[i];
    if (!std::isfinite(v)) throw std::invalid_argument("ecdf: non-finite value");
    if (i > 0 && v < sorted_values[i - 1]) throw std::invalid_argument("ecdf: input not sorted");
    if (cdf.jump_points.empty() || cdf.jump_points.back() != v) {
      cdf.jump_points.push_back(v);
      cdf.cum_counts.push_back(static_cast<int>(i) + 1);
    } else {
      cdf.cum_counts.back() = static_cast<int>(i) + 1;
    }
  }
  return cdf;
}

// Sorted distinct union of both groups' values. Both ECDFs are constant
// between consecutive grid points, so pointwise decisions on this grid are
// exhaustive.
inline std::vector<double> pooled_grid(const GroupedSamples& g) {
  std::vector<double> grid;
  grid.reserve(g.x.size() + g.y.size());
  std::merge(g.x.begin(), g.x.end(), g.y.begin(), g.y.end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// Exact-equality tie counts; the theory's tie concept is exact value equality.
inline TieReport detect_ties(const GroupedSamples& g) {
  TieReport report;
  report.within_tie_counts = {detail::duplicate_count(g.x), detail::duplicate_count(g.y)};
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < g.x.size() && j < g.y.size()) {
    if (g.x[i] < g.y[j]) {
      ++i;
    } else if (g.y[j] < g.x[i]) {
      ++j;
    } else {
      ++report.cross_tie_count;
      const double v = g.x[i];
      while (i < g.x.size() && g.x[i] == v) ++i;
      while (j < g.y.size() && g.y[j] == v) ++j;
    }
  }
  return report;
}

}  // namespace distband
