// rtsnoc: run, check and list scenario files.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtsnoc/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

fs::path scenario_dir() {
  if (const char* env = std::getenv("RTSNOC_SCENARIO_DIR")) return env;
  return RTSNOC_SCENARIO_DIR;
}

/// A path to a config file, or the name of a shipped scenario.
rtsnoc::Scenario resolve(const std::string& what) {
  if (fs::is_regular_file(what)) return rtsnoc::load_scenario(what);
  const fs::path builtin = scenario_dir() / (what + ".cfg");
  if (fs::is_regular_file(builtin)) return rtsnoc::load_scenario(builtin.string());
  throw rtsnoc::Error(rtsnoc::ErrorKind::Configuration, "no scenario file or builtin named '" + what + "'");
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<rtsnoc::Cycle> duration;
  std::optional<double> clock_ns;
  std::string output_dir = ".";
};

void apply(rtsnoc::Scenario& sc, const Overrides& o) {
  if (o.seed) sc.seeds = {*o.seed};
  if (o.duration) {
    if (*o.duration < 1) throw rtsnoc::Error(rtsnoc::ErrorKind::Configuration, "--duration must be >= 1");
    sc.duration = *o.duration;
  }
  if (o.clock_ns) {
    if (*o.clock_ns <= 0) throw rtsnoc::Error(rtsnoc::ErrorKind::Configuration, "--clock-ns must be positive");
    sc.clock_ns = *o.clock_ns;
  }
}

int run(const std::string& target, const Overrides& o) {
  rtsnoc::Scenario sc = resolve(target);
  apply(sc, o);
  const rtsnoc::RunReport report = rtsnoc::run_scenario(sc);
  fs::create_directories(o.output_dir);
  for (const auto& [mode, rows] : report.tables) {
    const fs::path file = fs::path(o.output_dir) / (sc.name + "_" + mode + ".csv");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw rtsnoc::Error(rtsnoc::ErrorKind::Configuration, "cannot write " + file.string());
    out << rtsnoc::to_csv(rows);
    std::cout << "wrote " << file.string() << "\n";
  }
  std::cout << report.summary;
  return report.ok() ? kExitOk : kExitInvariant;
}

int list() {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(scenario_dir())) {
    if (entry.path().extension() == ".cfg") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  for (const auto& n : names) std::cout << n << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flit-interleaving NoC simulator and latency analysis"};
  app.require_subcommand(1);
  Overrides o;
  std::string target;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario file or builtin and write CSV tables");
  run_cmd->add_option("scenario", target, "Config file or builtin name")->required();
  run_cmd->add_option("--seed", o.seed, "Replace the scenario's seed list with one seed");
  run_cmd->add_option("--duration", o.duration, "Simulated cycles");
  run_cmd->add_option("--output-dir", o.output_dir, "Directory for the CSV files");
  run_cmd->add_option("--clock-ns", o.clock_ns, "Nanoseconds per cycle");

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario without running it");
  validate_cmd->add_option("scenario", target, "Config file or builtin name")->required();

  app.add_subcommand("list-scenarios", "List the builtin scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return run(target, o);
    if (validate_cmd->parsed()) {
      std::cout << rtsnoc::describe(resolve(target));
      return kExitOk;
    }
    return list();
  } catch (const rtsnoc::Error& e) {
    std::cerr << e.what() << "\n";
    // a protocol error is the simulator catching a broken invariant mid-run
    return e.kind() == rtsnoc::ErrorKind::Protocol ? kExitInvariant : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
