#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "distband/engine.hpp"
#include "distband/parallel.hpp"
#include "distband/rng.hpp"

namespace distband {

inline constexpr std::uint64_t kDefaultSeed = 20180907;
inline constexpr std::int64_t kDefaultReps = 10000;
inline constexpr int kCacheSchemaVersion = 1;

inline bool is_supported_alpha(double alpha) {
  return alpha == 0.01 || alpha == 0.05 || alpha == 0.10;
}

// One calibration outcome: the tuning level alpha_tilde whose simulated
// familywise rejection rate under the continuous null stays at or below the
// target alpha, together with the achieved rate and the null statistics that
// produced it. Never-crossing replicates are stored as the kNoCrossing
// sentinel, which sorts after every real threshold.
struct CalibrationRecord {
  int n_x = 0;
  int n_y = 0;
  double alpha = 0.0;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;
  double alpha_tilde = 0.0;
  double alpha_sim = 0.0;
  std::vector<double> null_stats;  // sorted ascending
};

struct PValue {
  double value = 1.0;
  bool is_floor = false;  // reported as "< 1/reps"
};

// Null statistics by rank shuffling: under a continuous null the group labels
// of the pooled order statistics are an exchangeable random arrangement, which
// is exactly what the statistic depends on. No floats are drawn at all.
inline std::vector<double> simulate_null_stats(int n_x, int n_y, std::int64_t reps,
                                               std::uint64_t seed,
                                               const CrossingTable* shared_table = nullptr) {
  if (n_x < 1 || n_y < 1 || reps < 1) {
    throw std::domain_error("simulate_null_stats: requires sizes >= 1 and reps >= 1");
  }
  std::optional<CrossingTable> local;
  if (shared_table == nullptr || shared_table->n_x() != n_x || shared_table->n_y() != n_y) {
    local.emplace(n_x, n_y);
    shared_table = &*local;
  }
  std::vector<std::uint8_t> base(static_cast<std::size_t>(n_x) + n_y, 0);
  std::fill(base.begin() + n_x, base.end(), std::uint8_t{1});

  std::vector<double> stats(static_cast<std::size_t>(reps));
  parallel_for(reps, [&](std::int64_t rep) {
    Rng rng(seed, static_cast<std::uint64_t>(rep));
    std::vector<std::uint8_t> labels = base;
    rng.shuffle(labels);
    stats[static_cast<std::size_t>(rep)] = arrangement_statistic(labels, *shared_table);
  });
  std::sort(stats.begin(), stats.end());
  return stats;
}

// Selection rule: with sorted null statistics and m = floor(alpha * reps),
// alpha_tilde is the largest observed statistic whose empirical familywise
// rejection rate stays <= alpha. Ties spanning the cutoff force a step down
// to the next smaller distinct value; when nothing qualifies, alpha_tilde is
// placed below the smallest statistic and alpha_sim is 0.
inline CalibrationRecord calibrate_from_stats(int n_x, int n_y, double alpha,
                                              std::int64_t reps, std::uint64_t seed,
                                              std::vector<double> sorted_stats) {
  if (!is_supported_alpha(alpha)) {
    throw std::invalid_argument(
        "unsupported alpha: supported levels are 0.01, 0.05, and 0.10");
  }
  if (reps < static_cast<std::int64_t>(std::llround(1.0 / alpha))) {
    throw std::invalid_argument("calibrate: reps must be at least 1/alpha");
  }
  CalibrationRecord rec;
  rec.n_x = n_x;
  rec.n_y = n_y;
  rec.alpha = alpha;
  rec.reps = reps;
  rec.seed = seed;
  rec.null_stats = std::move(sorted_stats);

  const auto& stats = rec.null_stats;
  const auto count_le = [&](double v) {
    return static_cast<std::int64_t>(
        std::upper_bound(stats.begin(), stats.end(), v) - stats.begin());
  };
  const std::int64_t m =
      static_cast<std::int64_t>(std::floor(alpha * static_cast<double>(reps) + 1e-9));

  std::optional<double> chosen;
  if (m >= 1) {
    double cand = stats[static_cast<std::size_t>(m - 1)];
    for (;;) {
      if (cand < kNoCrossing && count_le(cand) <= m) {
        chosen = cand;
        break;
      }
      const auto it = std::lower_bound(stats.begin(), stats.end(), cand);
      if (it == stats.begin()) break;  // nothing smaller to step down to
      cand = *std::prev(it);
    }
  }
  if (chosen) {
    rec.alpha_tilde = *chosen;
    rec.alpha_sim = static_cast<double>(count_le(*chosen)) / static_cast<double>(reps);
  } else {
    rec.alpha_tilde = 0.5 * std::min(stats.front(), kNoCrossing);
    rec.alpha_sim = 0.0;
  }
  return rec;
}

inline CalibrationRecord calibrate(int n_x, int n_y, double alpha, std::int64_t reps,
                                   std::uint64_t seed) {
  return calibrate_from_stats(n_x, n_y, alpha, reps, seed,
                              simulate_null_stats(n_x, n_y, reps, seed));
}

// Simulated p-value: the share of null statistics at or below the observed
// one, floored at 1/reps so a zero count is never reported as zero. A
// no-crossing observation enters as the sentinel and yields p = 1.
inline PValue p_value(const GlobalStat& t_obs, const CalibrationRecord& record) {
  if (record.n_x != t_obs.n_x || record.n_y != t_obs.n_y) {
    throw std::invalid_argument("p_value: calibration record sizes do not match data");
  }
  const double effective = t_obs.t_obs ? *t_obs.t_obs : kNoCrossing;
  const auto count = static_cast<std::int64_t>(
      std::upper_bound(record.null_stats.begin(), record.null_stats.end(), effective) -
      record.null_stats.begin());
  if (count == 0) {
    return {1.0 / static_cast<double>(record.reps), true};
  }
  return {static_cast<double>(count) / static_cast<double>(record.reps), false};
}

namespace detail {

inline std::string cache_file_name(int n_x, int n_y, double alpha, std::int64_t reps,
                                   std::uint64_t seed) {
  char alpha_buf[16];
  std::snprintf(alpha_buf, sizeof(alpha_buf), "%.2f", alpha);
  std::ostringstream name;
  name << "distband_nx" << n_x << "_ny" << n_y << "_a" << alpha_buf << "_B" << reps
       << "_s" << seed << ".json";
  return name.str();
}

}  // namespace detail

// Disk/memory cache of calibration records, one file per
// (n_x, n_y, alpha, reps, seed). Files are human-readable JSON with a schema
// version; a mismatching or unreadable file triggers a rebuild, never a
// crash. Within one process the underlying null-statistic simulation is also
// shared across the three supported alpha levels.
class CalibrationCache {
 public:
  explicit CalibrationCache(std::filesystem::path dir = {}) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  const CalibrationRecord& lookup_or_build(int n_x, int n_y, double alpha,
                                           std::int64_t reps, std::uint64_t seed) {
    const Key key{n_x, n_y, alpha, reps, seed};
    if (const auto it = records_.find(key); it != records_.end()) return it->second;

    if (!dir_.empty()) {
      if (auto loaded = load_from_disk(key)) {
        stash_stats(key, loaded->null_stats);
        return records_.emplace(key, std::move(*loaded)).first->second;
      }
    }

    CalibrationRecord rec =
        calibrate_from_stats(n_x, n_y, alpha, reps, seed, stats_for(key));
    if (!dir_.empty()) persist(rec);
    return records_.emplace(key, std::move(rec)).first->second;
  }

  // number of full null-statistic simulations performed by this cache
  std::int64_t simulation_count() const { return simulations_; }

 private:
  struct Key {
    int n_x;
    int n_y;
    double alpha;
    std::int64_t reps;
    std::uint64_t seed;
    auto operator<=>(const Key&) const = default;
  };
  using SimKey = std::tuple<int, int, std::int64_t, std::uint64_t>;

  std::vector<double> stats_for(const Key& key) {
    const SimKey sim_key{key.n_x, key.n_y, key.reps, key.seed};
    if (const auto it = stats_.find(sim_key); it != stats_.end()) return it->second;
    ++simulations_;
    auto stats = simulate_null_stats(key.n_x, key.n_y, key.reps, key.seed);
    stats_.emplace(sim_key, stats);
    return stats;
  }

  void stash_stats(const Key& key, const std::vector<double>& stats) {
    stats_.emplace(SimKey{key.n_x, key.n_y, key.reps, key.seed}, stats);
  }

  std::optional<CalibrationRecord> load_from_disk(const Key& key) const {
    const auto path = dir_ / detail::cache_file_name(key.n_x, key.n_y, key.alpha,
                                                     key.reps, key.seed);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
      nlohmann::json doc = nlohmann::json::parse(in);
      if (doc.value("schema_version", -1) != kCacheSchemaVersion) return std::nullopt;
      CalibrationRecord rec;
      rec.n_x = doc.at("n_x").get<int>();
      rec.n_y = doc.at("n_y").get<int>();
      rec.alpha = doc.at("alpha").get<double>();
      rec.reps = doc.at("reps").get<std::int64_t>();
      rec.seed = doc.at("seed").get<std::uint64_t>();
      rec.alpha_tilde = doc.at("alpha_tilde").get<double>();
      rec.alpha_sim = doc.at("alpha_sim").get<double>();
      rec.null_stats = doc.at("null_stats").get<std::vector<double>>();
      if (rec.n_x != key.n_x || rec.n_y != key.n_y || rec.alpha != key.alpha ||
          rec.reps != key.reps || rec.seed != key.seed ||
          static_cast<std::int64_t>(rec.null_stats.size()) != rec.reps ||
          !std::is_sorted(rec.null_stats.begin(), rec.null_stats.end())) {
        std::cerr << "distband: warning: cache file " << path
                  << " does not match its key; rebuilding\n";
        return std::nullopt;
      }
      return rec;
    } catch (const std::exception& e) {
      std::cerr << "distband: warning: unreadable cache file " << path << " ("
                << e.what() << "); rebuilding\n";
      return std::nullopt;
    }
  }

  void persist(const CalibrationRecord& rec) const {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kCacheSchemaVersion;
    doc["n_x"] = rec.n_x;
    doc["n_y"] = rec.n_y;
    doc["alpha"] = rec.alpha;
    doc["reps"] = rec.reps;
    doc["seed"] = rec.seed;
    doc["alpha_tilde"] = rec.alpha_tilde;
    doc["alpha_sim"] = rec.alpha_sim;
    doc["null_stats"] = rec.null_stats;

    const auto path =
        dir_ / detail::cache_file_name(rec.n_x, rec.n_y, rec.alpha, rec.reps, rec.seed);
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) return;  // cache is best-effort; the record is still returned
      out << doc.dump(1) << '\n';
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
  }

  std::filesystem::path dir_;
  std::map<Key, CalibrationRecord> records_;
  std::map<SimKey, std::vector<double>> stats_;
  std::int64_t simulations_ = 0;
};

// Convenience entry matching the one-shot call shape; an empty cache_dir
// keeps everything in memory.
inline CalibrationRecord cache_lookup_or_build(int n_x, int n_y, double alpha,
                                               std::int64_t reps, std::uint64_t seed,
                                               const std::filesystem::path& cache_dir) {
  CalibrationCache cache(cache_dir);
  return cache.lookup_or_build(n_x, n_y, alpha, reps, seed);
}

}  // namespace distband
