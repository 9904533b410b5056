#include "nsf/constitutive.hpp"

#include <doctest.h>

#include <random>

using namespace nsf;

TEST_CASE("viscous stress tensor") {
  SUBCASE("unit gradient") {
    const Eigen::MatrixXd S = stress_tensor(Eigen::MatrixXd::Identity(2, 2), 1.0, 0.0);
    CHECK(S(0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(S(1, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(S(0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("antisymmetric gradient carries no stress") {
    Eigen::MatrixXd g(3, 3);
    g << 0, 1, -2, -1, 0, 3, 2, -3, 0;
    CHECK(stress_tensor(g, 1.7, 0.4).norm() == doctest::Approx(0.0));
  }
  SUBCASE("diagonal gradient with bulk viscosity") {
    const Eigen::MatrixXd S = stress_tensor(Eigen::Vector3d(1, 2, 3).asDiagonal(), 1.0, 1.0);
    CHECK(S(0, 0) == doctest::Approx(4.0));
    CHECK(S(1, 1) == doctest::Approx(6.0));
    CHECK(S(2, 2) == doctest::Approx(8.0));
  }
  CHECK_THROWS(stress_tensor(Eigen::MatrixXd::Zero(2, 3), 1.0, 0.0));
}

TEST_CASE("ideal gas reference constants") {
  const auto unit = ideal_gas_defaults(1.0, 1.0);
  CHECK(unit.pressure.p1 == doctest::Approx(1.0));
  CHECK(unit.pressure.p2 == doctest::Approx(1.0));
  CHECK(unit.energy.e2 == doctest::Approx(0.0));

  const auto hot = ideal_gas_defaults(2.0, 4.0);
  CHECK(hot.pressure.p2 == doctest::Approx(0.5));
  CHECK(hot.pressure.p0 == doctest::Approx(2.0));

  CHECK_THROWS_AS(ideal_gas_defaults(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ideal_gas_defaults(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("Maxwell relation") {
  auto ideal = ideal_gas_defaults(1.0, 4.0);
  ideal.box = {0.5, 1.5, 2.0, 6.0};
  CHECK(maxwell_residual(ideal) == 0.0);
  CHECK(maxwell_residual(virial_gas(1.0, 1.0, 0.1)) < 1e-14);
}

TEST_CASE("linearization constants") {
  const PhysicalParams pp;
  const auto unit = linearization_constants(ideal_gas_defaults(1.0, 1.0), pp);
  CHECK(unit.r0 == doctest::Approx(1.0));
  CHECK(unit.r1 == doctest::Approx(1.0));

  // Hand-built law with e2 = 0.5, p2 = 3 at T0 = 2.
  ConstitutiveLaws laws;
  laws.T0 = 2.0;
  laws.pressure.pi = [](double r, double t) { return r + 3.0 * (t - 2.0) + 1.0; };
  laws.pressure.d_rho = [](double, double) { return 1.0; };
  laws.pressure.d_theta = [](double, double) { return 3.0; };
  laws.energy.e_pi = [](double, double t) { return 0.5 * t; };
  laws.energy.d_rho = [](double, double) { return 0.0; };
  laws.energy.d_theta = [](double, double) { return 0.5; };
  finalize_laws(laws);
  PhysicalParams hot;
  hot.T0 = 2.0;
  const auto c = linearization_constants(laws, hot);
  CHECK(c.r0 == doctest::Approx(1.5));
  CHECK(c.r1 == doctest::Approx(6.0));

  SUBCASE("nonpositive temperature slope is rejected") {
    ConstitutiveLaws bad = laws;
    bad.pressure.p2 = 0.0;
    CHECK_THROWS_AS(linearization_constants(bad, hot), std::invalid_argument);
    bad.pressure.d_theta = [](double, double) { return -1.0; };
    CHECK_THROWS_AS(finalize_laws(bad), std::invalid_argument);
  }
}

TEST_CASE("partial derivatives match difference quotients") {
  std::mt19937_64 rng(1729);
  for (const auto& laws : {ideal_gas_defaults(1.3, 0.8), virial_gas(1.0, 1.0, 0.2)}) {
    std::uniform_real_distribution<double> R(laws.box.rho_min, laws.box.rho_max);
    std::uniform_real_distribution<double> T(laws.box.theta_min, laws.box.theta_max);
    for (int k = 0; k < 100; ++k) {
      const double r = R(rng), t = T(rng), e = 1e-6;
      const auto& pl = laws.pressure;
      const double dr = (pl.pi(r + e, t) - pl.pi(r - e, t)) / (2 * e);
      const double dt = (pl.pi(r, t + e) - pl.pi(r, t - e)) / (2 * e);
      CHECK(dr == doctest::Approx(pl.d_rho(r, t)).epsilon(1e-6));
      CHECK(dt == doctest::Approx(pl.d_theta(r, t)).epsilon(1e-6));
      const auto& el = laws.energy;
      const double er = (el.e_pi(r + e, t) - el.e_pi(r - e, t)) / (2 * e);
      CHECK(er == doctest::Approx(el.d_rho(r, t)).epsilon(1e-6));
    }
  }
}

TEST_CASE("state box and derived viscosities") {
  const StateBox box;
  CHECK(box.contains(1.0, 1.0));
  CHECK_FALSE(box.contains(0.4, 1.0));
  CHECK_FALSE(box.contains(1.0, 2.5));

  PhysicalParams pp;
  pp.mu = 3.0;
  pp.lambda = 1.0;
  CHECK(pp.grad_div() == doctest::Approx(2.0));
  CHECK(pp.bulk() == doctest::Approx(5.0));
  CHECK(pp.L(Patch::Inflow) == 0.0);
  CHECK(pp.L(Patch::Wall) == pp.L_wall);
  CHECK(damping_gamma(pp, 2.5) == doctest::Approx(0.5));
}
