#pragma once

#include "nsf/grid.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>

namespace nsf {

using StateFn = std::function<double(double rho, double theta)>;

/// Admissible states around the reference point (1, T0).
struct StateBox {
  double rho_min = 0.5, rho_max = 1.5;
  double theta_min = 0.5, theta_max = 2.0;

  bool contains(double rho, double theta) const {
    return rho >= rho_min && rho <= rho_max && theta >= theta_min && theta <= theta_max;
  }
};

struct PressureLaw {
  std::string name;
  StateFn pi, d_rho, d_theta;
  double p0 = 0, p1 = 0, p2 = 0;  // pi and its partials at (1, T0)
};

/// e(rho, theta) = c_v * theta + e_pi(rho, theta) with c_v = 1.
struct EnergyLaw {
  std::string name;
  StateFn e_pi, d_rho, d_theta;
  double c_v = 1.0;
  double e1 = 0, e2 = 0;  // partials of e_pi at (1, T0)
};

struct ConstitutiveLaws {
  PressureLaw pressure;
  EnergyLaw energy;
  StateBox box;
  double T0 = 1.0;
};

struct PhysicalParams {
  double mu = 1.0;
  double lambda = 0.0;
  double kappa = 50.0;
  double alpha = 10.0;
  double L_wall = 50.0;  // heat exchange on the walls; zero on inflow and outflow
  double T0 = 1.0;

  double L(Patch p) const { return p == Patch::Wall ? L_wall : 0.0; }
  /// Coefficient of grad div in the momentum operator: lambda + mu/3.
  double grad_div() const { return lambda + mu / 3.0; }
  double bulk() const { return lambda + 4.0 * mu / 3.0; }
};

double damping_gamma(const PhysicalParams& pp, double p1);

/// pi = p0 rho theta / T0 with e_pi = 0.
ConstitutiveLaws ideal_gas_defaults(double p0, double T0);
/// pi = a rho theta + b rho^2 theta^2 with a fixed by pi(1, T0) = p0, e_pi = -b rho theta^2.
ConstitutiveLaws virial_gas(double p0, double T0, double b);

/// Validates reference constants and stores them on the laws.
void finalize_laws(ConstitutiveLaws& laws);

/// max |d_rho e_pi - (pi - theta d_theta pi)/rho^2| over an n x n sample of the box.
double maxwell_residual(const ConstitutiveLaws& laws, int n = 11);

Eigen::MatrixXd stress_tensor(const Eigen::MatrixXd& grad_v, double mu, double lambda);

struct LinearizationConstants {
  double p1 = 0, p2 = 0, e2 = 0;
  double r0 = 1;  // coefficient of d/dx1 eta
  double r1 = 0;  // coefficient of div u
};

LinearizationConstants linearization_constants(const ConstitutiveLaws& laws,
                                               const PhysicalParams& pp);

}  // namespace nsf
