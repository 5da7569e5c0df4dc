#pragma once

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distband/report.hpp"

namespace distband {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimlabConfig {
  std::string suite = "all";
  std::int64_t trials = 500;
  std::uint64_t seed = kDefaultSeed;
  std::int64_t reps = kDefaultReps;
  std::string json_path;
};

struct CliCommand {
  enum class Kind { Compare, Simlab, Help };
  Kind kind = Kind::Compare;
  RunConfig run;
  SimlabConfig simlab;
  std::string help_text;
};

// Parses argv (without the program name). Throws UsageError on any invalid
// usage; --help surfaces as Kind::Help with the usage text.
inline CliCommand parse_args(const std::vector<std::string>& argv) {
  CliCommand cmd;
  std::string filter_expr;
  bool no_plot = false;
  bool random_seed = false;

  CLI::App app{"distband - compare two sampled distributions pointwise with "
               "finite-sample familywise error control"};
  app.set_help_flag("-h,--help", "print usage and exit");
  app.add_option("--data", cmd.run.data_path, "input CSV file (header row required)");
  app.add_option("--var", cmd.run.value_col, "column holding the values to compare");
  app.add_option("--by", cmd.run.group_col, "column holding the two group labels");
  app.add_option("--alpha", cmd.run.alpha,
                 "familywise error rate level: 0.10 (default), 0.05, or 0.01");
  app.add_flag("--pvalue", cmd.run.want_pvalue, "also simulate the global p-value");
  app.add_flag("--no-plot", no_plot, "suppress the SVG plot");
  app.add_option("--reps", cmd.run.reps, "simulation replications (default 10000)");
  app.add_option("--seed", cmd.run.seed, "RNG seed (default 20180907)");
  app.add_flag("--random-seed", random_seed, "draw the seed from the system entropy source");
  app.add_option("--cache-dir", cmd.run.cache_dir,
                 "directory for calibration cache files (default: none, in-memory)");
  app.add_option("--filter", filter_expr,
                 "row filter <column><op><value>, op one of == != <= >= < >");
  app.add_option("--json", cmd.run.json_path, "write the JSON report to this path");
  app.add_option("--svg", cmd.run.svg_path,
                 "write the plot to this path (default distband_plot.svg)");

  auto* simlab = app.add_subcommand(
      "simlab", "run the statistical validation suites on synthetic data");
  simlab->add_option("--suite", cmd.simlab.suite, "fwer | power | invariance | all");
  simlab->add_option("--trials", cmd.simlab.trials, "datasets per experiment (default 500)");
  simlab->add_option("--seed", cmd.simlab.seed, "RNG seed (default 20180907)");
  simlab->add_option("--reps", cmd.simlab.reps,
                     "calibration replications per experiment (default 10000)");
  simlab->add_option("--json", cmd.simlab.json_path, "write the results table to this path");

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    cmd.kind = CliCommand::Kind::Help;
    cmd.help_text = app.help();
    return cmd;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (simlab->parsed()) {
    cmd.kind = CliCommand::Kind::Simlab;
    static const std::vector<std::string> suites = {"fwer", "power", "invariance", "all"};
    if (std::find(suites.begin(), suites.end(), cmd.simlab.suite) == suites.end()) {
      throw UsageError("unknown suite '" + cmd.simlab.suite +
                       "': expected fwer, power, invariance, or all");
    }
    if (cmd.simlab.trials < 1) throw UsageError("--trials must be positive");
    return cmd;
  }

  cmd.kind = CliCommand::Kind::Compare;
  if (cmd.run.data_path.empty() || cmd.run.value_col.empty() || cmd.run.group_col.empty()) {
    throw UsageError("--data, --var, and --by are required (see --help)");
  }
  if (!is_supported_alpha(cmd.run.alpha)) {
    throw UsageError("unsupported --alpha: accepted values are 0.01, 0.05, and 0.10");
  }
  if (cmd.run.reps < 100) {
    throw UsageError("--reps must be at least 100");
  }
  if (random_seed) {
    std::random_device rd;
    cmd.run.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  if (!filter_expr.empty()) {
    try {
      cmd.run.filter = parse_filter(filter_expr);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  cmd.run.want_plot = !no_plot;
  return cmd;
}

}  // namespace distband
