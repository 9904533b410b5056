#pragma once

#include "nsf/constitutive.hpp"
#include "nsf/data.hpp"
#include "nsf/grid.hpp"
#include "nsf/picard.hpp"

#include <map>
#include <string>
#include <vector>

namespace nsf {

/// Outcome of one inequality check lhs <= constant * rhs.
struct InequalityVerdict {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  bool pass = false;
  bool outlier = false;  // ratio above 10x the calibration median
  std::string note;

  double ratio() const;
};

/// Both sides of an inequality before a constant is attached.
struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

InequalityVerdict make_verdict(const std::string& id, const InequalitySides& s, double constant,
                               double median_ratio = 0.0);

BoundaryField boundary_trace(const Grid& grid, const ScalarField& f);
/// Boundary L2 norm over a set of patches.
double patch_L2(const Grid& grid, const ScalarField& f, const std::vector<Patch>& patches);

/// ||u||^2_{L2(G1)} <= C [ ||u||^2_{L2(G2)} + ||grad u||^2 ].
InequalitySides poincare_boundary_sides(const Grid& grid, const ScalarField& u,
                                        const std::vector<Patch>& g1, const std::vector<Patch>& g2);
/// ||u||^2_{L2} <= C [ ||u||^2_{L2(G1)} + ||grad u||^2 ].
InequalitySides poincare_volume_sides(const Grid& grid, const ScalarField& u,
                                      const std::vector<Patch>& g1);
/// ||u||^2_{W^1_2} <= C [ int mu |D(u)|^2 + int_Gamma (alpha |u_tau|^2 + (u.n)^2) ].
InequalitySides korn_sides(const Grid& grid, const VectorField& u, double mu, double alpha);
/// ||f||_p - eps ||grad f||_p <= C(eps) ||f||_2.
InequalitySides interpolation_sides(const Grid& grid, const ScalarField& f, double eps, double p);
/// Weak norm of the solution against the data norms of the linear system.
InequalitySides energy_sides(const Grid& grid, const LinearProblemData& data, const FlowState& sol);
/// ||S(h)||_{L_inf(L_2)} <= C [ ||w_in||_{L2(inflow)} + ||h||_{L2} ].
InequalitySides transport_sides(const Grid& grid, const Eigen::VectorXd& w_in, const ScalarField& h,
                                const ScalarField& w);

/// Default patch choices of the two Poincare variants.
std::vector<Patch> poincare_boundary_target();  // inflow and outflow
std::vector<Patch> poincare_boundary_control();  // walls
std::vector<Patch> poincare_volume_control();  // inflow

// ---------------------------------------------------------------------------

/// Residuals of the full nonlinear system at a physical state, scaled L2 = sqrt(int r^2 / |Omega|).
struct MainSystemResidual {
  VectorField momentum;
  ScalarField continuity;
  ScalarField energy;
  std::map<std::string, double> norms;

  /// Largest of the momentum, continuity and energy norms.
  double pde_max() const;
  /// Largest boundary-condition norm.
  double bc_max() const;
};

MainSystemResidual residual_main_system(const Grid& grid, const PhysicalState& state,
                                        const ProblemData& data, const ConstitutiveLaws& laws,
                                        const PhysicalParams& pp);

double scaled_L2(const Grid& grid, const ScalarField& f);
double scaled_L2(const Grid& grid, const VectorField& f);
double scaled_boundary_L2(const Grid& grid, const BoundaryField& f, const std::vector<Patch>& patches);

// ---------------------------------------------------------------------------
// Weak forms of the linearized momentum and energy equations.

/// int (d/dx1 u).v + S(grad u):grad v - (p1 sigma + p2 eta) div v - F.v + boundary friction terms.
double weak_momentum_residual(const LinearSystem& sys, const LinearProblemData& data,
                              const FlowState& sol, const VectorField& v);
/// int (r0 d/dx1 eta + r1 div u - H) z + kappa grad eta.grad z + int_Gamma L eta z.
double weak_energy_residual(const LinearSystem& sys, const LinearProblemData& data,
                            const FlowState& sol, const ScalarField& z);

/// Momentum and energy residuals with generic difference operators (no ghost relations).
struct GenericResidual {
  double momentum = 0.0;  // L2 over nodes where no normal condition applies
  double energy = 0.0;
};

GenericResidual generic_strong_residual(const LinearSystem& sys, const LinearProblemData& data,
                                        const FlowState& sol);

}  // namespace nsf
