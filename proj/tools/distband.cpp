#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "distband/cli.hpp"
#include "distband/report.hpp"
#include "distband/simlab.hpp"
#include "distband/svg.hpp"

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write to " + path);
  out << content;
}

int run_compare(const distband::RunConfig& config) {
  const distband::GroupedSamples g = distband::read_csv(
      config.data_path, config.value_col, config.group_col, config.filter);
  const distband::ComparisonReport report = distband::run_comparison(config, g);
  std::cout << distband::render_text(report);
  if (!config.json_path.empty()) {
    write_file(config.json_path, distband::render_json(report));
  }
  if (config.want_plot) {
    const std::string path = config.svg_path.empty() ? "distband_plot.svg" : config.svg_path;
    write_file(path, distband::render_svg(report, g));
    std::cout << "(plot written to " << path << ")\n";
  }
  return 0;
}

int run_simlab(const distband::SimlabConfig& config) {
  distband::simlab::SuiteOptions options;
  options.suite = config.suite;
  options.trials = config.trials;
  options.seed = config.seed;
  options.reps = config.reps;
  nlohmann::ordered_json doc;
  const int code = distband::simlab::run_suites(options, std::cout, &doc);
  if (!config.json_path.empty()) {
    write_file(config.json_path, doc.dump(2) + "\n");
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const std::vector<std::string> args(argv + 1, argv + argc);
    const distband::CliCommand cmd = distband::parse_args(args);
    switch (cmd.kind) {
      case distband::CliCommand::Kind::Help:
        std::cout << cmd.help_text;
        return 0;
      case distband::CliCommand::Kind::Simlab:
        return run_simlab(cmd.simlab);
      case distband::CliCommand::Kind::Compare:
        return run_compare(cmd.run);
    }
    return 0;
  } catch (const distband::UsageError& e) {
    std::cerr << "distband: " << e.what() << "\nRun 'distband --help' for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "distband: error: " << e.what() << "\n";
    return 1;
  }
}
