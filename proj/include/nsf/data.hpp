#pragma once

#include "nsf/constitutive.hpp"
#include "nsf/grid.hpp"

#include <map>
#include <string>

namespace nsf {

/// Physical data of the channel problem, sampled on a grid.
struct ProblemData {
  VectorField f;           // body force
  FaceVectorField b;       // slip data, tangential columns
  BoundaryField d;         // normal velocity n.v
  Eigen::VectorXd rho_in;  // inflow density, inflow face order
  BoundaryField g;         // heat flux
  BoundaryField T1;        // wall temperature offset
};

/// f = 0, b = alpha tau^(1), d = n^(1), rho_in = 1, g = 0, T1 = 0.
ProblemData background_data(const Grid& grid, const PhysicalParams& pp);

/// d < 0 on the inflow face, d > 0 on the outflow face, d = 0 on the walls.
void validate_data(const Grid& grid, const ProblemData& data);

/// Named analytic profile "kind(key=value, ...)" or a CSV file path.
struct Profile {
  std::string kind = "zero";
  std::map<std::string, double> params;
  std::string csv_path;

  double param(const std::string& key, double fallback) const;
};

Profile parse_profile(const std::string& text);

/// Boundary profile value at a face point (tangential coordinate scaled to [0,1]).
double boundary_profile(const Profile& pr, const Point& x, const Face& face, double length);
BoundaryField sample_boundary_profile(const Grid& grid, const Profile& pr, bool in_out, bool walls);
/// Volume profile for the body force (vector valued).
VectorField sample_volume_profile(const Grid& grid, const Profile& pr);

/// Perturbation profiles of every datum plus a common scale.
struct DataProfiles {
  Profile f, b, d, rho_in, g, T1;
  double scale = 1.0;
};

ProblemData build_problem_data(const Grid& grid, const PhysicalParams& pp, const DataProfiles& pr);

}  // namespace nsf
