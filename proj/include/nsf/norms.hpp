#pragma once

#include "nsf/grid.hpp"

#include <map>
#include <string>

namespace nsf {

inline constexpr double kDefaultP = 4.0;

double norm_Lp(const Grid& grid, const ScalarField& f, double p);
double norm_Lp(const Grid& grid, const VectorField& u, double p);
double norm_Linf(const ScalarField& f);
double norm_W1p(const Grid& grid, const ScalarField& f, double p);
double norm_W1p(const Grid& grid, const VectorField& u, double p);
double norm_W2p(const Grid& grid, const ScalarField& f, double p);
double norm_W2p(const Grid& grid, const VectorField& u, double p);

/// max over x1-slices of the cross-sectional L2 norm.
double sup_slice_L2_norm(const Grid& grid, const ScalarField& f);
/// Cross-sectional L2 norm of every x1-slice.
Eigen::VectorXd slice_L2_norms(const Grid& grid, const ScalarField& f);

/// Tangential derivatives of face data, one vector per tangential axis (ascending).
std::vector<Eigen::VectorXd> face_tangential_derivatives(const Grid& grid, int face,
                                                         const Eigen::VectorXd& values);

/// Boundary L_p norm over all faces, or over the faces of one patch.
double boundary_Lp(const Grid& grid, const BoundaryField& f, double p);
double boundary_Lp(const Grid& grid, const BoundaryField& f, double p, Patch patch);
/// Trace surrogate: boundary L_p plus the L_p norm of tangential first differences.
double trace_norm(const Grid& grid, const BoundaryField& f, double p);
double trace_norm(const Grid& grid, const BoundaryField& f, double p, Patch patch);
/// Discrete W^1_p norm of inflow data on the inflow face.
double inflow_W1p(const Grid& grid, const Eigen::VectorXd& inflow_values, double p);
double inflow_L2(const Grid& grid, const Eigen::VectorXd& inflow_values);

struct NormReport {
  std::string id;
  double L2 = 0, Lp = 0, W12 = 0, W1p = 0, W2p = 0, Linf = 0, LinfL2 = 0;
  std::map<std::string, double> trace;  // boundary L_p per patch
};

NormReport norm_report(const Grid& grid, const std::string& id, const ScalarField& f,
                       double p = kDefaultP);

}  // namespace nsf
