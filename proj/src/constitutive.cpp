#include "nsf/constitutive.hpp"

#include <cmath>
#include <stdexcept>

namespace nsf {

double damping_gamma(const PhysicalParams& pp, double p1) { return p1 / pp.bulk(); }

namespace {

StateBox default_box(double T0) {
  StateBox b;
  b.theta_min = 0.5 * T0;
  b.theta_max = 2.0 * T0;
  return b;
}

}  // namespace

void finalize_laws(ConstitutiveLaws& laws) {
  const double T0 = laws.T0;
  auto& pl = laws.pressure;
  pl.p0 = pl.pi(1.0, T0);
  pl.p1 = pl.d_rho(1.0, T0);
  pl.p2 = pl.d_theta(1.0, T0);
  if (!(pl.p0 > 0.0)) throw std::invalid_argument("pressure law: pi(1,T0) must be positive");
  if (!(pl.p1 > 0.0)) throw std::invalid_argument("pressure law: d_rho pi(1,T0) must be positive");
  if (!(pl.p2 > 0.0)) throw std::invalid_argument("pressure law: d_theta pi(1,T0) must be positive");
  laws.energy.e1 = laws.energy.d_rho(1.0, T0);
  laws.energy.e2 = laws.energy.d_theta(1.0, T0);
}

ConstitutiveLaws ideal_gas_defaults(double p0, double T0) {
  if (!(p0 > 0.0) || !(T0 > 0.0)) throw std::invalid_argument("ideal gas needs p0, T0 > 0");
  ConstitutiveLaws laws;
  laws.T0 = T0;
  laws.box = default_box(T0);
  const double c = p0 / T0;
  laws.pressure.name = "ideal";
  laws.pressure.pi = [c](double r, double t) { return c * r * t; };
  laws.pressure.d_rho = [c](double, double t) { return c * t; };
  laws.pressure.d_theta = [c](double r, double) { return c * r; };
  laws.energy.name = "ideal";
  laws.energy.e_pi = [](double, double) { return 0.0; };
  laws.energy.d_rho = [](double, double) { return 0.0; };
  laws.energy.d_theta = [](double, double) { return 0.0; };
  finalize_laws(laws);
  return laws;
}

ConstitutiveLaws virial_gas(double p0, double T0, double b) {
  if (!(p0 > 0.0) || !(T0 > 0.0)) throw std::invalid_argument("virial gas needs p0, T0 > 0");
  ConstitutiveLaws laws;
  laws.T0 = T0;
  laws.box = default_box(T0);
  const double a = (p0 - b * T0 * T0) / T0;
  laws.pressure.name = "virial";
  laws.pressure.pi = [a, b](double r, double t) { return a * r * t + b * r * r * t * t; };
  laws.pressure.d_rho = [a, b](double r, double t) { return a * t + 2.0 * b * r * t * t; };
  laws.pressure.d_theta = [a, b](double r, double t) { return a * r + 2.0 * b * r * r * t; };
  laws.energy.name = "virial";
  laws.energy.e_pi = [b](double r, double t) { return -b * r * t * t; };
  laws.energy.d_rho = [b](double, double t) { return -b * t * t; };
  laws.energy.d_theta = [b](double r, double t) { return -2.0 * b * r * t; };
  finalize_laws(laws);
  return laws;
}

double maxwell_residual(const ConstitutiveLaws& laws, int n) {
  const auto& box = laws.box;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = box.rho_min + (box.rho_max - box.rho_min) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double t = box.theta_min + (box.theta_max - box.theta_min) * j / (n - 1);
      const double rhs = (laws.pressure.pi(r, t) - t * laws.pressure.d_theta(r, t)) / (r * r);
      worst = std::max(worst, std::abs(laws.energy.d_rho(r, t) - rhs));
    }
  }
  return worst;
}

Eigen::MatrixXd stress_tensor(const Eigen::MatrixXd& grad_v, double mu, double lambda) {
  if (grad_v.rows() != grad_v.cols()) throw std::invalid_argument("velocity gradient must be square");
  const double div = grad_v.trace();
  const auto I = Eigen::MatrixXd::Identity(grad_v.rows(), grad_v.cols());
  return mu * (grad_v + grad_v.transpose() - (2.0 / 3.0) * div * I) + lambda * div * I;
}

LinearizationConstants linearization_constants(const ConstitutiveLaws& laws,
                                               const PhysicalParams& pp) {
  LinearizationConstants c;
  c.p1 = laws.pressure.p1;
  c.p2 = laws.pressure.p2;
  c.e2 = laws.energy.e2;
  if (!(c.p2 > 0.0)) throw std::invalid_argument("d_theta pi at the reference state must be positive");
  c.r0 = 1.0 + c.e2;
  c.r1 = pp.T0 * c.p2;
  return c;
}

}  // namespace nsf
