#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "distband/calibration.hpp"
#include "distband/csv.hpp"
#include "distband/engine.hpp"
#include "distband/ks.hpp"
#include "distband/samples.hpp"

namespace distband {

struct RunConfig {
  std::string data_path;
  std::string value_col;
  std::string group_col;
  double alpha = 0.10;
  bool want_pvalue = false;
  bool want_plot = true;
  std::int64_t reps = kDefaultReps;
  std::uint64_t seed = kDefaultSeed;
  std::string cache_dir;  // empty -> in-memory calibration only
  std::optional<RowFilter> filter;
  std::string json_path;
  std::string svg_path;
};

struct ComparisonReport {
  std::string var_name;
  std::string group_var;
  std::string label_x;
  std::string label_y;
  std::int64_t n_total = 0;
  std::int64_t n_x = 0;
  std::int64_t n_y = 0;
  std::int64_t n_dropped = 0;
  std::int64_t cross_tie_count = 0;
  bool tie_warning = false;
  bool rej_gof10 = false;
  bool rej_gof05 = false;
  bool rej_gof01 = false;
  std::optional<PValue> p_gof;
  double alpha = 0.10;
  double alpha_tilde = 0.0;
  double alpha_sim = 0.0;
  RejectionRanges ranges;
  KsResult ks;
};

namespace detail {

// 7 significant digits, leading zero stripped ("0.0055889" -> ".0055889"),
// matching the precision of the textual report.
inline std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.7g", v);
  std::string s(buf);
  if (s.rfind("0.", 0) == 0) {
    s.erase(0, 1);
  } else if (s.rfind("-0.", 0) == 0) {
    s.erase(1, 1);
  }
  return s;
}

inline std::string fmt_percent(double alpha) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%g%%", alpha * 100.0);
  return buf;
}

inline bool rejects(const GlobalStat& stat, const CalibrationRecord& rec) {
  return stat.t_obs.has_value() && *stat.t_obs <= rec.alpha_tilde;
}

}  // namespace detail

// Full pipeline for one dataset: global statistic, calibrated verdicts at the
// three supported levels (all served by one shared null simulation), rejected
// ranges at the requested level, optional simulated p-values, and the KS
// baseline.
inline ComparisonReport run_comparison(const RunConfig& config, const GroupedSamples& g) {
  if (!is_supported_alpha(config.alpha)) {
    throw std::invalid_argument(
        "unsupported alpha: supported levels are 0.01, 0.05, and 0.10");
  }
  ComparisonReport report;
  report.var_name = config.value_col;
  report.group_var = config.group_col;
  report.label_x = g.label_x;
  report.label_y = g.label_y;
  report.n_x = g.nx();
  report.n_y = g.ny();
  report.n_total = report.n_x + report.n_y;
  report.n_dropped = g.n_dropped;
  report.alpha = config.alpha;

  const TieReport ties = detect_ties(g);
  report.cross_tie_count = ties.cross_tie_count;
  report.tie_warning = ties.cross_tie_count > 0;

  const CrossingTable table(g.nx(), g.ny());
  const GlobalStat stat = global_statistic(g, table);

  CalibrationCache cache(config.cache_dir.empty() ? std::filesystem::path{}
                                                  : std::filesystem::path(config.cache_dir));
  const auto& rec10 = cache.lookup_or_build(g.nx(), g.ny(), 0.10, config.reps, config.seed);
  const auto& rec05 = cache.lookup_or_build(g.nx(), g.ny(), 0.05, config.reps, config.seed);
  const auto& rec01 = cache.lookup_or_build(g.nx(), g.ny(), 0.01, config.reps, config.seed);
  report.rej_gof10 = detail::rejects(stat, rec10);
  report.rej_gof05 = detail::rejects(stat, rec05);
  report.rej_gof01 = detail::rejects(stat, rec01);

  const CalibrationRecord& chosen =
      config.alpha == 0.10 ? rec10 : (config.alpha == 0.05 ? rec05 : rec01);
  report.alpha_tilde = chosen.alpha_tilde;
  report.alpha_sim = chosen.alpha_sim;
  report.ranges = rejected_ranges(g, chosen.alpha_tilde, table);

  if (config.want_pvalue) report.p_gof = p_value(stat, chosen);

  report.ks = ks_statistic(g);
  report.ks.p_asymptotic = ks_p_asymptotic(report.ks.d, g.nx(), g.ny());
  if (config.want_pvalue) {
    report.ks.p_permutation =
        ks_p_permutation(g, config.reps, config.seed ^ 0x4b534b534b534b53ull);
  }
  return report;
}

// Convenience entry that also performs the CSV ingestion.
inline ComparisonReport run_comparison(const RunConfig& config) {
  const GroupedSamples g =
      read_csv(config.data_path, config.value_col, config.group_col, config.filter);
  return run_comparison(config, g);
}

inline std::string render_text(const ComparisonReport& r) {
  std::ostringstream out;
  out << "Comparing distribution of " << r.var_name << " when " << r.group_var << "="
      << r.label_x << " vs. " << r.group_var << "=" << r.label_y << "\n";
  out << "N (total, " << r.group_var << "=" << r.label_x << ", " << r.group_var << "="
      << r.label_y << ") = " << r.n_total << ", " << r.n_x << ", " << r.n_y << "\n";
  if (r.n_dropped > 0) {
    out << "(" << r.n_dropped << " row(s) dropped: missing value or excluded by filter)\n";
  }
  if (r.tie_warning) {
    out << "Warning: " << r.cross_tie_count
        << " value(s) observed in both groups; with ties the FWER control may be "
           "conservative.\n";
  }
  out << "\nGlobal test of equality of two CDFs:\n";
  if (r.p_gof) {
    if (r.p_gof->is_floor) {
      out << "    Simulated p-value < " << detail::fmt_number(r.p_gof->value) << "\n";
    } else {
      out << "    Simulated p-value = " << detail::fmt_number(r.p_gof->value) << "\n";
    }
  }
  out << "    At a 10% level: " << (r.rej_gof10 ? "reject" : "do not reject") << "\n";
  out << "    At a  5% level: " << (r.rej_gof05 ? "reject" : "do not reject") << "\n";
  out << "    At a  1% level: " << (r.rej_gof01 ? "reject" : "do not reject") << "\n";

  if (!r.ranges.empty()) {
    out << "\nWith strong control of FWER at a " << detail::fmt_percent(r.alpha)
        << " level,\nCDF equality is rejected at all points in the following\nranges of "
        << r.var_name << ":\n\n";
    char line[64];
    std::snprintf(line, sizeof(line), " %9s  %9s\n", "from", "to");
    out << line;
    for (const auto& [from, to] : r.ranges.ranges) {
      std::snprintf(line, sizeof(line), " %9s  %9s\n", detail::fmt_number(from).c_str(),
                    detail::fmt_number(to).c_str());
      out << line;
    }
  }

  out << "\nalpha = " << detail::fmt_number(r.alpha)
      << "   alpha_tilde = " << detail::fmt_number(r.alpha_tilde)
      << "   simulated FWER (alpha_sim) = " << detail::fmt_number(r.alpha_sim) << "\n";
  out << "Two-sample Kolmogorov-Smirnov: D = " << detail::fmt_number(r.ks.d)
      << "   asymptotic p = " << detail::fmt_number(r.ks.p_asymptotic);
  if (r.ks.p_permutation) {
    out << "   permutation p = " << detail::fmt_number(*r.ks.p_permutation);
  }
  out << "\n";
  return out.str();
}

inline std::string render_json(const ComparisonReport& r) {
  nlohmann::ordered_json doc;
  doc["var"] = r.var_name;
  doc["group_var"] = r.group_var;
  doc["groups"] = {r.label_x, r.label_y};
  doc["n"] = {r.n_total, r.n_x, r.n_y};
  doc["n_dropped"] = r.n_dropped;
  doc["tie_warning"] = r.tie_warning;
  doc["cross_tie_count"] = r.cross_tie_count;
  doc["rej_gof10"] = r.rej_gof10;
  doc["rej_gof05"] = r.rej_gof05;
  doc["rej_gof01"] = r.rej_gof01;
  if (r.p_gof) {
    doc["p_gof"] = r.p_gof->value;
    doc["p_gof_floor"] = r.p_gof->is_floor;
  } else {
    doc["p_gof"] = nullptr;
    doc["p_gof_floor"] = false;
  }
  doc["alpha"] = r.alpha;
  doc["alpha_tilde"] = r.alpha_tilde;
  doc["alpha_sim"] = r.alpha_sim;
  auto ranges = nlohmann::ordered_json::array();
  for (const auto& [from, to] : r.ranges.ranges) {
    ranges.push_back({{"from", from}, {"to", to}});
  }
  doc["rej_ranges"] = std::move(ranges);
  nlohmann::ordered_json ks;
  ks["d"] = r.ks.d;
  ks["p_asymptotic"] = r.ks.p_asymptotic;
  if (r.ks.p_permutation) {
    ks["p_permutation"] = *r.ks.p_permutation;
  } else {
    ks["p_permutation"] = nullptr;
  }
  doc["ks"] = std::move(ks);
  return doc.dump(2) + "\n";
}

}  // namespace distband
