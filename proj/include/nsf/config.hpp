#pragma once

#include "nsf/constitutive.hpp"
#include "nsf/data.hpp"
#include "nsf/picard.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { Solve, VerifyInequalities, TransportOracle, ConvergenceStudy };

const char* mode_name(RunMode m);
RunMode parse_mode(const std::string& s);

struct RunConfig {
  RunMode mode = RunMode::Solve;
  double length = 2.0;
  int dim = 2;
  std::vector<int> resolution{32, 16};
  PhysicalParams params;
  std::string pressure_law = "ideal";
  double p0 = 1.0;
  double virial_b = 0.0;
  DataProfiles data;
  PicardOptions iteration;
  double p = kDefaultP;
  std::vector<int> study_resolutions{16, 32, 64};
  std::uint64_t seed = 1729;
};

/// Parses TOML text; relative CSV profile paths resolve against base_dir.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
/// Positivity of the physical parameters, p > 3, sane resolutions. Throws ConfigError.
void validate_config(const RunConfig& cfg);

ConstitutiveLaws make_laws(const RunConfig& cfg);
ChannelDomain make_domain(const RunConfig& cfg);

}  // namespace nsf
