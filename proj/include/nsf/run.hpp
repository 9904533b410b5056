#pragma once

#include "nsf/calibration.hpp"
#include "nsf/config.hpp"
#include "nsf/diagnostics.hpp"
#include "nsf/picard.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace nsf {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitDiverged = 3, kExitVerdict = 4 };

struct RunOptions {
  std::string out_dir = ".";
  std::string calibration_path;  // read if it exists, otherwise calibrate and write there
  std::vector<int> resolutions;  // overrides study.resolutions when non-empty
  std::ostream* log = nullptr;
};

/// Everything a solve produces, without touching the filesystem.
struct SolveOutcome {
  std::vector<int> resolution;
  double h = 0.0;
  PicardResult picard;
  PhysicalState physical;  // empty unless the iterate is finite
  BackgroundState background;
  LiftField lift;
  bool residual_available = false;
  MainSystemResidual residual;
  std::vector<InequalityVerdict> verdicts;
  std::vector<std::string> warnings;
  double c_g = 0, c_g_effective = 0, compatibility_defect = 0, lift_defect = 0;
  double weak_norm = 0, strong_norm = 0;
  int exit_code = kExitOk;
};

/// Problem data, background, Picard iteration and verdicts for one config.
SolveOutcome solve_problem(const RunConfig& cfg, const Calibration* cal = nullptr,
                           const StepCallback& on_step = {});

/// Geometric rate of the increments and the median recorded ratio, for the contraction check.
struct ContractionFit {
  double geometric_rate = 0.0;
  double median_q = 0.0;
  int points = 0;
};
ContractionFit contraction_fit(const IterationReport& rep, double floor = 1e-9);

int run_solve(const RunConfig& cfg, const RunOptions& opts);
int run_verify(const RunConfig& cfg, const RunOptions& opts);
int run_transport_oracle(const RunConfig& cfg, const RunOptions& opts);
int run_study(const RunConfig& cfg, const RunOptions& opts);
/// Dispatches on cfg.mode.
int run(const RunConfig& cfg, const RunOptions& opts);
/// Loads and runs a config file; configuration problems map to exit code 2.
int run_config_file(const std::string& path, const RunOptions& opts);

/// Max |characteristic - marching| on a grid for a seeded random transport problem.
double transport_oracle_discrepancy(const Grid& grid, std::uint64_t seed, double velocity_scale);
/// Max error of traced trajectories against the closed-form logistic solution.
double logistic_characteristic_error(const Grid& grid, double eps);

}  // namespace nsf
