#include "nsf/parallel.hpp"
#include "nsf/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

int dispatch(const std::string& path, nsf::RunOptions opts, std::optional<nsf::RunMode> forced) {
  try {
    nsf::RunConfig cfg = nsf::load_config(path);
    if (forced) {
      cfg.mode = *forced;
      nsf::validate_config(cfg);
    }
    return nsf::run(cfg, opts);
  } catch (const nsf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return nsf::kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady compressible channel flow solver"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = ".";
  std::string calibration;
  std::vector<int> resolutions;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "TOML run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", out_dir, "Directory for all outputs");
    sub->add_option("--calibration", calibration, "Calibration file to read, or to write if absent");
    sub->add_flag("-q,--quiet", quiet, "Suppress progress output");
  };
  CLI::App* solve = app.add_subcommand("solve", "Background, Picard iteration and verdicts");
  CLI::App* verify = app.add_subcommand("verify", "Calibrate and check the inequality suite");
  CLI::App* study = app.add_subcommand("study", "Manufactured-solution convergence study");
  CLI::App* oracle = app.add_subcommand("transport-oracle", "Marching against traced characteristics");
  CLI::App* run = app.add_subcommand("run", "Run the mode named in the config");
  for (CLI::App* sub : {solve, verify, study, oracle, run}) add_common(sub);
  for (CLI::App* sub : {study, oracle})
    sub->add_option("--resolutions", resolutions, "Cells along the channel, one per grid")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  nsf::RunOptions opts;
  opts.out_dir = out_dir;
  opts.calibration_path = calibration;
  opts.resolutions = resolutions;
  if (!quiet) opts.log = &std::cout;

  std::optional<nsf::RunMode> mode;
  if (solve->parsed()) mode = nsf::RunMode::Solve;
  if (verify->parsed()) mode = nsf::RunMode::VerifyInequalities;
  if (study->parsed()) mode = nsf::RunMode::ConvergenceStudy;
  if (oracle->parsed()) mode = nsf::RunMode::TransportOracle;
  try {
    return dispatch(config, opts, mode);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
