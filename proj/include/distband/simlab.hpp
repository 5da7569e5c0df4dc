#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "distband/calibration.hpp"
#include "distband/engine.hpp"
#include "distband/ks.hpp"
#include "distband/parallel.hpp"
#include "distband/rng.hpp"
#include "distband/samples.hpp"

namespace distband::simlab {

// Data-generating recipe for one group.
struct Recipe {
  enum class Kind { Uniform, Normal, ShiftAboveMedian, DiscreteLattice, TailShift };
  Kind kind = Kind::Uniform;
  int n = 25;
  double mu = 0.0;
  double sigma = 1.0;
  double shift = 2.0;      // ShiftAboveMedian: added above the (zero) median
  int lattice_points = 5;  // DiscreteLattice
  int contaminated = 6;    // TailShift: observations pushed past the support
  double offset = 1e6;     // TailShift
};

inline std::vector<double> draw(const Recipe& recipe, Rng& rng) {
  std::vector<double> values(static_cast<std::size_t>(recipe.n));
  switch (recipe.kind) {
    case Recipe::Kind::Uniform:
      for (auto& v : values) v = rng.next_open();
      break;
    case Recipe::Kind::Normal:
      for (auto& v : values) v = rng.normal(recipe.mu, recipe.sigma);
      break;
    case Recipe::Kind::ShiftAboveMedian:
      for (auto& v : values) {
        const double z = rng.normal();
        v = z > 0.0 ? z + recipe.shift : z;
      }
      break;
    case Recipe::Kind::DiscreteLattice:
      for (auto& v : values) {
        v = std::ceil(rng.next_open() * recipe.lattice_points) /
            static_cast<double>(recipe.lattice_points);
      }
      break;
    case Recipe::Kind::TailShift:
      for (auto& v : values) v = rng.next_open();
      for (int i = 0; i < recipe.contaminated && i < recipe.n; ++i) {
        values[static_cast<std::size_t>(i)] += recipe.offset;
      }
      break;
  }
  std::sort(values.begin(), values.end());
  return values;
}

// The set of points where the two population CDFs truly agree, known
// analytically from the recipe pair.
struct EqualitySet {
  enum class Kind { All, SinglePoint, AtOrBelow, None };
  Kind kind = Kind::All;
  double point = 0.0;

  bool intersects(const RejectionRanges& rejected) const {
    switch (kind) {
      case Kind::All:
        return !rejected.empty();
      case Kind::SinglePoint:
        for (const auto& [from, to] : rejected.ranges) {
          if (from <= point && point <= to) return true;
        }
        return false;
      case Kind::AtOrBelow:
        for (const auto& [from, to] : rejected.ranges) {
          if (from <= point) return true;
        }
        return false;
      case Kind::None:
        return false;
    }
    return false;
  }
};

struct FwerExperiment {
  std::string name;
  Recipe recipe_x;
  Recipe recipe_y;
  EqualitySet truth;
  std::int64_t trials = 2000;
  double alpha = 0.10;
  std::int64_t reps = kDefaultReps;
  std::uint64_t seed = kDefaultSeed;
};

struct ExperimentOutcome {
  double fwer = 0.0;     // rate of rejections intersecting the equality set
  double power = 0.0;    // any-rejection rate
  double ks_rate = 0.0;  // asymptotic-KS rejection rate at the same alpha
  double mc_se = 0.0;    // sqrt(alpha (1 - alpha) / trials)
  std::int64_t trials = 0;
  double alpha_sim = 0.0;
  double alpha_tilde = 0.0;
};

namespace detail_sim {

// Per-trial substreams start far above the calibration replicate streams so
// the two never reuse an arrangement.
inline constexpr std::uint64_t kTrialStreamBase = 1ull << 32;

inline GroupedSamples make_samples(std::vector<double> x, std::vector<double> y) {
  GroupedSamples g;
  g.x = std::move(x);
  g.y = std::move(y);
  g.label_x = "0";
  g.label_y = "1";
  return g;
}

}  // namespace detail_sim

inline ExperimentOutcome run_fwer_experiment(const FwerExperiment& e) {
  if (e.trials < 500) {
    throw std::invalid_argument("run_fwer_experiment: trials must be >= 500");
  }
  const int n_x = e.recipe_x.n;
  const int n_y = e.recipe_y.n;
  const CrossingTable table(n_x, n_y);
  const CalibrationRecord rec = calibrate_from_stats(
      n_x, n_y, e.alpha, e.reps, e.seed,
      simulate_null_stats(n_x, n_y, e.reps, e.seed, &table));

  std::vector<std::uint8_t> error_flags(static_cast<std::size_t>(e.trials), 0);
  std::vector<std::uint8_t> any_flags(static_cast<std::size_t>(e.trials), 0);
  std::vector<std::uint8_t> ks_flags(static_cast<std::size_t>(e.trials), 0);
  parallel_for(e.trials, [&](std::int64_t trial) {
    Rng rng(e.seed, detail_sim::kTrialStreamBase + static_cast<std::uint64_t>(trial));
    const GroupedSamples g =
        detail_sim::make_samples(draw(e.recipe_x, rng), draw(e.recipe_y, rng));
    const RejectionRanges rejected = rejected_ranges(g, rec.alpha_tilde, table);
    error_flags[trial] = e.truth.intersects(rejected) ? 1 : 0;
    any_flags[trial] = rejected.empty() ? 0 : 1;
    const KsResult ks = ks_statistic(g);
    ks_flags[trial] = ks_p_asymptotic(ks.d, n_x, n_y) <= e.alpha ? 1 : 0;
  });

  ExperimentOutcome out;
  out.trials = e.trials;
  std::int64_t errors = 0;
  std::int64_t any = 0;
  std::int64_t ks_hits = 0;
  for (std::int64_t t = 0; t < e.trials; ++t) {
    errors += error_flags[t];
    any += any_flags[t];
    ks_hits += ks_flags[t];
  }
  out.fwer = static_cast<double>(errors) / static_cast<double>(e.trials);
  out.power = static_cast<double>(any) / static_cast<double>(e.trials);
  out.ks_rate = static_cast<double>(ks_hits) / static_cast<double>(e.trials);
  out.mc_se = std::sqrt(e.alpha * (1.0 - e.alpha) / static_cast<double>(e.trials));
  out.alpha_sim = rec.alpha_sim;
  out.alpha_tilde = rec.alpha_tilde;
  return out;
}

struct PowerRecipe {
  std::string name;
  Recipe recipe_x;
  Recipe recipe_y;
};

struct PowerRow {
  std::string name;
  double method_rate = 0.0;
  double ks_rate = 0.0;
  double se = 0.0;
  std::int64_t trials = 0;
};

// Any-rejection rate of the band method versus the asymptotic KS test at the
// same level, per recipe.
inline std::vector<PowerRow> run_power_comparison(const std::vector<PowerRecipe>& recipes,
                                                  std::int64_t trials, double alpha,
                                                  std::uint64_t seed,
                                                  std::int64_t reps = kDefaultReps) {
  if (recipes.size() < 2) {
    throw std::invalid_argument("run_power_comparison: needs at least two recipes");
  }
  std::vector<PowerRow> rows;
  rows.reserve(recipes.size());
  for (const auto& recipe : recipes) {
    FwerExperiment e;
    e.name = recipe.name;
    e.recipe_x = recipe.recipe_x;
    e.recipe_y = recipe.recipe_y;
    e.truth = {EqualitySet::Kind::None, 0.0};
    e.trials = trials;
    e.alpha = alpha;
    e.reps = reps;
    e.seed = seed;
    const ExperimentOutcome outcome = run_fwer_experiment(e);
    PowerRow row;
    row.name = recipe.name;
    row.method_rate = outcome.power;
    row.ks_rate = outcome.ks_rate;
    row.se = std::sqrt(0.25 / static_cast<double>(trials));  // worst-case binomial SE
    row.trials = trials;
    rows.push_back(row);
  }
  return rows;
}

// --- monotone transforms -----------------------------------------------------

// Strictly increasing transforms used by the invariance checks. "exp" is
// prescaled per dataset so extreme values stay finite.
inline std::function<double(double)> make_transform(const std::string& id,
                                                    const GroupedSamples& g) {
  if (id == "exp") {
    double max_abs = 1.0;
    for (const double v : g.x) max_abs = std::max(max_abs, std::fabs(v));
    for (const double v : g.y) max_abs = std::max(max_abs, std::fabs(v));
    const double scale = std::max(1.0, max_abs / 500.0);
    return [scale](double v) { return std::exp(v / scale); };
  }
  if (id == "arctan-rescale") {
    return [](double v) { return 2.0 * std::atan(v / 4.0); };
  }
  if (id == "cubic-plus-linear") {
    return [](double v) { return v * v * v + v; };
  }
  throw std::invalid_argument("unknown transform: " + id);
}

inline GroupedSamples apply_transform(const GroupedSamples& g,
                                      const std::function<double(double)>& f) {
  GroupedSamples out = g;
  for (auto& v : out.x) v = f(v);
  for (auto& v : out.y) v = f(v);
  return out;
}

struct InvarianceResult {
  bool pass = false;
  std::string detail;
};

namespace detail_sim {

struct Fingerprint {
  std::optional<double> t_obs;
  bool rej10 = false, rej05 = false, rej01 = false;
  double p = 1.0;
  bool p_floor = false;
  std::vector<std::pair<std::size_t, std::size_t>> range_index_pairs;
};

inline Fingerprint fingerprint(const GroupedSamples& g, std::int64_t reps,
                               std::uint64_t seed) {
  const CrossingTable table(g.nx(), g.ny());
  const auto stats = simulate_null_stats(g.nx(), g.ny(), reps, seed, &table);
  Fingerprint fp;
  const GlobalStat stat = global_statistic(g, table);
  fp.t_obs = stat.t_obs;
  CalibrationRecord rec10, rec05, rec01;
  rec10 = calibrate_from_stats(g.nx(), g.ny(), 0.10, reps, seed, stats);
  rec05 = calibrate_from_stats(g.nx(), g.ny(), 0.05, reps, seed, stats);
  rec01 = calibrate_from_stats(g.nx(), g.ny(), 0.01, reps, seed, stats);
  const auto reject = [&](const CalibrationRecord& rec) {
    return stat.t_obs.has_value() && *stat.t_obs <= rec.alpha_tilde;
  };
  fp.rej10 = reject(rec10);
  fp.rej05 = reject(rec05);
  fp.rej01 = reject(rec01);
  const PValue p = p_value(stat, rec10);
  fp.p = p.value;
  fp.p_floor = p.is_floor;
  const auto grid = pooled_grid(g);
  const auto index_of = [&](double v) {
    return static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), v) - grid.begin());
  };
  for (const auto& [from, to] : rejected_ranges(g, rec10.alpha_tilde, table).ranges) {
    fp.range_index_pairs.emplace_back(index_of(from), index_of(to));
  }
  return fp;
}

}  // namespace detail_sim

// Applies a strictly increasing transform and asserts that the statistic, all
// three verdicts, the p-value, and the rank positions of every rejected-range
// endpoint are unchanged.
inline InvarianceResult run_invariance_check(const GroupedSamples& g,
                                             const std::string& transform_id,
                                             std::uint64_t seed,
                                             std::int64_t reps = kDefaultReps) {
  const auto before = detail_sim::fingerprint(g, reps, seed);
  const auto transformed = apply_transform(g, make_transform(transform_id, g));
  const auto after = detail_sim::fingerprint(transformed, reps, seed);

  std::string why;
  if (before.t_obs != after.t_obs) why += "t_obs changed; ";
  if (before.rej10 != after.rej10 || before.rej05 != after.rej05 ||
      before.rej01 != after.rej01) {
    why += "verdicts changed; ";
  }
  if (before.p != after.p || before.p_floor != after.p_floor) why += "p-value changed; ";
  if (before.range_index_pairs != after.range_index_pairs) {
    why += "range endpoint indices changed; ";
  }
  return {why.empty(), why.empty() ? "identical" : why};
}

// --- fixed datasets -----------------------------------------------------------

// 49 evenly spaced "control" values against 20 values whose last six sit far
// beyond the control support; the tail design a max-gap test is blind to.
inline GroupedSamples tail_outlier_fixture() {
  GroupedSamples g;
  g.label_x = "0";
  g.label_y = "1";
  for (int j = 1; j <= 49; ++j) g.x.push_back(j / 50.0);
  for (int k = 1; k <= 14; ++k) g.y.push_back(k / 21.0);
  for (int i = 64; i <= 69; ++i) g.y.push_back(1000000.0 + i);
  return g;
}

inline GroupedSamples separated_fixture() {
  GroupedSamples g;
  g.label_x = "0";
  g.label_y = "1";
  g.x = {1.0, 2.0, 3.0, 4.0, 5.0};
  g.y = {11.0, 12.0, 13.0, 14.0, 15.0};
  return g;
}

inline GroupedSamples random_fixture(const Recipe& rx, const Recipe& ry,
                                     std::uint64_t seed) {
  Rng rng(seed, 0);
  return detail_sim::make_samples(draw(rx, rng), draw(ry, rng));
}

// --- suites -------------------------------------------------------------------

struct SuiteOptions {
  std::string suite = "all";
  std::int64_t trials = 500;
  std::uint64_t seed = kDefaultSeed;
  std::int64_t reps = kDefaultReps;
};

// Runs the requested suites, streaming a plain-text table and returning the
// same results as JSON. Returns a nonzero exit code when an invariance check
// fails.
inline int run_suites(const SuiteOptions& options, std::ostream& out,
                      nlohmann::ordered_json* json_out = nullptr) {
  nlohmann::ordered_json doc;
  doc["suite"] = options.suite;
  doc["trials"] = options.trials;
  doc["seed"] = options.seed;
  doc["reps"] = options.reps;
  auto results = nlohmann::ordered_json::array();
  int exit_code = 0;
  const std::int64_t trials = std::max<std::int64_t>(options.trials, 500);

  const auto want = [&](const char* name) {
    return options.suite == "all" || options.suite == name;
  };

  if (want("fwer")) {
    out << "== fwer suite (trials=" << trials << ", alpha=0.10) ==\n";
    struct Scenario {
      const char* name;
      Recipe rx, ry;
      EqualitySet truth;
    };
    const Recipe uniform25{Recipe::Kind::Uniform, 25};
    Recipe normal1{Recipe::Kind::Normal, 25};
    Recipe normal3{Recipe::Kind::Normal, 25};
    normal3.sigma = 3.0;
    Recipe lattice{Recipe::Kind::DiscreteLattice, 25};
    const std::vector<Scenario> scenarios = {
        {"uniform-null", uniform25, uniform25, {EqualitySet::Kind::All, 0.0}},
        {"normal-scale-strong", normal1, normal3, {EqualitySet::Kind::SinglePoint, 0.0}},
        {"discrete-lattice-ties", lattice, lattice, {EqualitySet::Kind::All, 0.0}},
    };
    for (const auto& scenario : scenarios) {
      FwerExperiment e;
      e.name = scenario.name;
      e.recipe_x = scenario.rx;
      e.recipe_y = scenario.ry;
      e.truth = scenario.truth;
      e.trials = trials;
      e.alpha = 0.10;
      e.reps = options.reps;
      e.seed = options.seed;
      const ExperimentOutcome o = run_fwer_experiment(e);
      out << "  " << std::left << std::setw(24) << scenario.name
          << " fwer=" << std::setprecision(4) << o.fwer << "  ks_rate=" << o.ks_rate
          << "  alpha_sim=" << o.alpha_sim << "  3se=" << 3.0 * o.mc_se << "\n";
      results.push_back({{"suite", "fwer"},
                         {"name", scenario.name},
                         {"fwer", o.fwer},
                         {"power", o.power},
                         {"ks_rate", o.ks_rate},
                         {"alpha_sim", o.alpha_sim},
                         {"alpha_tilde", o.alpha_tilde},
                         {"mc_se", o.mc_se},
                         {"trials", o.trials}});
    }
  }

  if (want("power")) {
    out << "== power suite (trials=" << trials << ", alpha=0.10) ==\n";
    Recipe uniform49{Recipe::Kind::Uniform, 49};
    Recipe tail20{Recipe::Kind::TailShift, 20};
    Recipe normal30{Recipe::Kind::Normal, 30};
    Recipe shifted30{Recipe::Kind::Normal, 30};
    shifted30.mu = 1.5;
    const std::vector<PowerRecipe> recipes = {
        {"tail-contamination", uniform49, tail20},
        {"location-shift-1.5sd", normal30, shifted30},
    };
    for (const auto& row : run_power_comparison(recipes, trials, 0.10, options.seed,
                                                options.reps)) {
      out << "  " << std::left << std::setw(24) << row.name
          << " method=" << std::setprecision(4) << row.method_rate
          << "  ks=" << row.ks_rate << "\n";
      results.push_back({{"suite", "power"},
                         {"name", row.name},
                         {"method_rate", row.method_rate},
                         {"ks_rate", row.ks_rate},
                         {"se", row.se},
                         {"trials", row.trials}});
    }
    // fixed tail-outlier dataset: the max-gap test misses what the bands catch
    {
      const GroupedSamples g = tail_outlier_fixture();
      const CrossingTable table(g.nx(), g.ny());
      const GlobalStat stat = global_statistic(g, table);
      const CalibrationRecord rec01 = calibrate_from_stats(
          g.nx(), g.ny(), 0.01, options.reps, options.seed,
          simulate_null_stats(g.nx(), g.ny(), options.reps, options.seed, &table));
      const bool method_rejects_1pct =
          stat.t_obs.has_value() && *stat.t_obs <= rec01.alpha_tilde;
      const KsResult ks = ks_statistic(g);
      const double ks_p = ks_p_asymptotic(ks.d, g.nx(), g.ny());
      out << "  " << std::left << std::setw(24) << "fixed-tail-outliers"
          << " method_rejects_1pct=" << (method_rejects_1pct ? "yes" : "no")
          << "  ks_p=" << std::setprecision(4) << ks_p << "\n";
      results.push_back({{"suite", "power"},
                         {"name", "fixed-tail-outliers"},
                         {"method_rejects_1pct", method_rejects_1pct},
                         {"ks_p_asymptotic", ks_p}});
    }
  }

  if (want("invariance")) {
    out << "== invariance suite ==\n";
    Recipe normal30{Recipe::Kind::Normal, 30};
    Recipe shift50{Recipe::Kind::ShiftAboveMedian, 50};
    Recipe normal50{Recipe::Kind::Normal, 50};
    Recipe normal40{Recipe::Kind::Normal, 40};
    Recipe scale40{Recipe::Kind::Normal, 40};
    scale40.sigma = 3.0;
    const std::vector<std::pair<std::string, GroupedSamples>> datasets = {
        {"tail-outliers", tail_outlier_fixture()},
        {"separated", separated_fixture()},
        {"normal-equal", random_fixture(normal30, normal30, options.seed + 1)},
        {"shift-above-median", random_fixture(normal50, shift50, options.seed + 2)},
        {"normal-scale", random_fixture(normal40, scale40, options.seed + 3)},
    };
    for (const auto& [name, g] : datasets) {
      for (const std::string id : {"exp", "arctan-rescale", "cubic-plus-linear"}) {
        const InvarianceResult r = run_invariance_check(g, id, options.seed, options.reps);
        out << "  " << std::left << std::setw(20) << name << " " << std::setw(18) << id
            << " " << (r.pass ? "PASS" : ("FAIL: " + r.detail)) << "\n";
        if (!r.pass) exit_code = 1;
        results.push_back({{"suite", "invariance"},
                           {"dataset", name},
                           {"transform", id},
                           {"pass", r.pass}});
      }
    }
  }

  doc["results"] = std::move(results);
  if (json_out != nullptr) *json_out = std::move(doc);
  return exit_code;
}

}  // namespace distband::simlab
