#pragma once

#include "nsf/constitutive.hpp"
#include "nsf/data.hpp"
#include "nsf/elliptic.hpp"
#include "nsf/grid.hpp"

#include <string>
#include <vector>

namespace nsf {

/// Unit axial flow, unit density, temperature theta0 + theta1.
struct BackgroundState {
  ScalarField theta0;
  ScalarField theta1;
  double T0 = 1.0;
  double c_g = 0.0;              // (1/|Omega|) int g, as defined
  double c_g_effective = 0.0;    // source the discrete Neumann solve actually realizes
  double compatibility_defect = 0.0;
  std::vector<std::string> warnings;

  ScalarField theta() const { return theta0 + theta1; }
};

double compute_cg(const BoundaryField& g, const Grid& grid);

struct Theta0Result {
  ScalarField theta0;
  double c_g = 0.0;
  double c_g_effective = 0.0;
  double compatibility_defect = 0.0;
};

/// -kappa Lap theta0 = c_g, kappa d theta0/dn = g, mean(theta0) = T0.
Theta0Result solve_theta0(const BoundaryField& g, double T0, double kappa, const Grid& grid);

/// r0 d/dx1 theta1 - kappa Lap theta1 = -r0 d/dx1 theta0 - c_g with
/// kappa d theta1/dn + L (theta1 - (T1 + T0 - theta0)) = 0.
ScalarField solve_theta1(const ScalarField& theta0, double c_g, const BoundaryField& T1,
                         const PhysicalParams& pp, double r0, const Grid& grid);

BackgroundState build_background(const Grid& grid, const ProblemData& data,
                                 const PhysicalParams& pp, const ConstitutiveLaws& laws);

/// u0 = grad phi with Lap phi = (1/|Omega|) int flux and d phi/dn = flux.
struct LiftField {
  VectorField u0;
  ScalarField phi;
  double source = 0.0;
  double compatibility_defect = 0.0;
};

/// Normal components of u0 on the faces are set to the flux datum itself.
LiftField build_lift(const BoundaryField& flux, const Grid& grid);
/// Lift of d - n^(1), the part of the normal datum not carried by the unit flow.
LiftField build_lift_for(const ProblemData& data, const Grid& grid);

/// Distance of the data from the background data.
double data_distance_D0(const Grid& grid, const ProblemData& data, const PhysicalParams& pp,
                        double p);

}  // namespace nsf
