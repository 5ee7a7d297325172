// Command-line front end: wmr_track <path|synth|simulate|compare> [--config FILE] [--out DIR] [-v]

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wmr/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Trajectory tracking for a differential-drive robot: Bezier references, "
               "classic and fuzzy (Type I / interval Type II) controllers"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir;
  bool verbose = false;
  app.add_option("-c,--config", config_file, "INI run configuration (defaults when omitted)");
  app.add_option("-o,--out", out_dir, "output directory, overrides [output] dir");
  app.add_flag("-v,--verbose", verbose, "print solver and envelope details to stderr");

  auto* path = app.add_subcommand("path", "sample the reference and write trajectory.csv");
  auto* synth = app.add_subcommand("synth", "solve the PDC LMIs and write gains, poles, report");
  auto* simulate = app.add_subcommand("simulate", "closed-loop run, writes trace.csv and metrics.csv");
  auto* compare = app.add_subcommand("compare", "classic vs type1 vs type2, writes comparison.csv");
  for (auto* sub : {path, synth, simulate, compare}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : wmr::kExitConfig;
  }

  const wmr::CommandIo io{std::cout, std::cerr, verbose};
  try {
    wmr::RunConfig config = config_file.empty() ? wmr::RunConfig{} : wmr::load_config(config_file);
    if (!out_dir.empty()) config.output_dir = out_dir;

    if (*path) return wmr::cmd_path(config, io);
    if (*synth) return wmr::cmd_synth(config, io);
    if (*simulate) return wmr::cmd_simulate(config, io);
    return wmr::cmd_compare(config, io);
  } catch (const wmr::Error& e) {
    std::cerr << "error (" << wmr::to_string(e.code()) << "): " << e.what() << '\n';
    return wmr::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return wmr::kExitFailure;
  }
}
