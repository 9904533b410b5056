#pragma once

#include "nsf/diagnostics.hpp"
#include "nsf/picard.hpp"
#include "nsf/transport.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace nsf {

inline constexpr std::uint64_t kCalibrationSeed = 1729;

/// Seeded families of smooth random fields built from a few Fourier modes.
class RandomFields {
 public:
  RandomFields(const Grid& grid, std::uint64_t seed);

  ScalarField smooth_scalar(int modes = 3);
  VectorField smooth_vector(int modes = 3);
  /// Vector field with n.u = 0 on every face.
  VectorField tangent_vector(int modes = 3);
  Eigen::VectorXd inflow_profile(int modes = 3);
  /// Smooth (u, sigma, eta) with n.u = 0, each component scaled to max |.| = scale.
  FlowState smooth_state(double scale);
  /// Random data of the linear system; U has max |.| = velocity_scale and is tangent to the walls.
  LinearProblemData linear_data(double scale, double velocity_scale);
  TransportProblem transport_problem(double velocity_scale);

  double uniform(double a, double b);

 private:
  const Grid* grid_;
  std::mt19937_64 rng_;
};

struct CalibrationEntry {
  double constant = 0.0;      // registered constant: drift allowance x observed max
  double observed_max = 0.0;  // largest ratio on the calibration family
  double median = 0.0;
  int samples = 0;
};

struct Calibration {
  std::uint64_t seed = kCalibrationSeed;
  double length = 2.0;
  std::vector<int> resolution;
  double drift = 2.0;
  std::map<std::string, CalibrationEntry> entries;

  bool has(const std::string& id) const { return entries.count(id) > 0; }
  const CalibrationEntry& at(const std::string& id) const;
};

struct CalibrationOptions {
  std::uint64_t seed = kCalibrationSeed;
  int scalar_samples = 100;
  int energy_samples = 20;
  int transport_samples = 50;
  double drift = 2.0;
  std::vector<double> interpolation_eps{0.5, 0.1, 0.02};
  double p = kDefaultP;
};

std::string interpolation_id(double eps);

/// Samples lhs/rhs ratios of every checker on the seeded family and freezes the constants.
Calibration calibrate(const Grid& grid, const LinearSystem& sys, const CalibrationOptions& opts = {});

/// Fresh samples (different seed) checked against frozen constants; one verdict per checker
/// reporting its worst sample.
std::vector<InequalityVerdict> verify_inequalities(const Grid& grid, const LinearSystem& sys,
                                                   const Calibration& cal, std::uint64_t seed,
                                                   const CalibrationOptions& opts = {});

std::string calibration_to_json(const Calibration& cal);
Calibration calibration_from_json(const std::string& text);
void save_calibration(const std::string& path, const Calibration& cal);
Calibration load_calibration(const std::string& path);

}  // namespace nsf
