#include "nsf/calibration.hpp"
#include "nsf/diagnostics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace nsf;

namespace {

Grid channel(int n) { return Grid(ChannelDomain(2.0, 2), {n, n / 2}); }

CalibrationOptions quick() {
  CalibrationOptions o;
  o.scalar_samples = 10;
  o.energy_samples = 3;
  o.transport_samples = 5;
  return o;
}

}  // namespace

TEST_CASE("verdict logic") {
  const InequalityVerdict ok = make_verdict("x", {1.0, 1.0}, 2.0);
  CHECK(ok.pass);
  CHECK(ok.ratio() == 1.0);
  CHECK_FALSE(make_verdict("x", {3.0, 1.0}, 2.0).pass);
  CHECK(make_verdict("x", {2.0, 1.0}, 2.0).pass);

  SUBCASE("outliers fail even below the constant") {
    const InequalityVerdict v = make_verdict("x", {11.0, 1.0}, 100.0, 1.0);
    CHECK(v.outlier);
    CHECK_FALSE(v.pass);
    CHECK(make_verdict("x", {9.0, 1.0}, 100.0, 1.0).pass);
  }
  SUBCASE("zero median disables the outlier rule") {
    const InequalityVerdict v = make_verdict("x", {11.0, 1.0}, 100.0, 0.0);
    CHECK_FALSE(v.outlier);
    CHECK(v.pass);
  }
  SUBCASE("degenerate right-hand side") {
    CHECK(make_verdict("x", {0.0, 0.0}, 1.0).pass);
    CHECK(make_verdict("x", {0.0, 0.0}, 1.0).ratio() == 0.0);
    CHECK(std::isinf(make_verdict("x", {1.0, 0.0}, 1.0).ratio()));
  }
}

TEST_CASE("inequality sides on closed-form examples") {
  const Grid g = channel(16);
  const ScalarField one = ScalarField::Ones(g.size());

  // Constant: |Omega| = 2 against an inflow face of length 1.
  const InequalitySides pv = poincare_volume_sides(g, one, poincare_volume_control());
  CHECK(pv.lhs == doctest::Approx(2.0));
  CHECK(pv.rhs == doctest::Approx(1.0));
  const InequalitySides pb = poincare_boundary_sides(g, one, poincare_boundary_target(), poincare_boundary_control());
  CHECK(pb.lhs == doctest::Approx(2.0));
  CHECK(pb.rhs == doctest::Approx(4.0));

  // Unit axial flow: walls of total length 4 carry alpha |u_tau|^2, inflow and outflow (u.n)^2.
  VectorField e1 = VectorField::Zero(g.size(), 2);
  e1.col(0).setOnes();
  const InequalitySides k = korn_sides(g, e1, 1.0, 3.0);
  CHECK(k.lhs == doctest::Approx(2.0));
  CHECK(k.rhs == doctest::Approx(3.0 * 4.0 + 2.0));

  const InequalitySides ip = interpolation_sides(g, one, 0.1, 4.0);
  CHECK(ip.lhs == doctest::Approx(std::pow(2.0, 0.25)));
  CHECK(ip.rhs == doctest::Approx(std::sqrt(2.0)));

  const InequalitySides tr = transport_sides(g, Eigen::VectorXd::Ones(g.slice_size()), ScalarField::Zero(g.size()), one);
  CHECK(tr.lhs == doctest::Approx(1.0));
  CHECK(tr.rhs == doctest::Approx(1.0));
}

TEST_CASE("main system residual") {
  const Grid g = channel(16);
  const PhysicalParams pp;
  const ConstitutiveLaws laws = ideal_gas_defaults(1.0, pp.T0);
  const ProblemData data = background_data(g, pp);
  PhysicalState st;
  st.v = VectorField::Zero(g.size(), 2);
  st.v.col(0).setOnes();
  st.rho = ScalarField::Ones(g.size());
  st.theta = ScalarField::Constant(g.size(), pp.T0);
  const MainSystemResidual exact = residual_main_system(g, st, data, laws, pp);
  CHECK(exact.pde_max() < 1e-12);
  CHECK(exact.bc_max() < 1e-12);

  RandomFields rf(g, kCalibrationSeed);
  st.v += rf.tangent_vector();
  st.rho.array() += 0.2 * rf.smooth_scalar().array() / rf.smooth_scalar().cwiseAbs().maxCoeff();
  const MainSystemResidual rough = residual_main_system(g, st, data, laws, pp);
  CHECK(rough.pde_max() > 1e-2);
  for (const auto& [name, v] : rough.norms) CHECK(std::isfinite(v));
}

TEST_CASE("calibration") {
  const Grid g = channel(16);
  const PhysicalParams pp;
  const LinearSystem sys(g, pp, linearization_constants(ideal_gas_defaults(1.0, 1.0), pp));
  const Calibration a = calibrate(g, sys, quick());

  SUBCASE("constants are the drift allowance times the observed maximum") {
    CHECK_FALSE(a.entries.empty());
    for (const auto& [id, e] : a.entries) {
      CHECK(e.constant == doctest::Approx(2.0 * e.observed_max));
      CHECK(e.median <= e.observed_max);
      CHECK(e.samples > 0);
    }
    CHECK(a.has(interpolation_id(0.1)));
  }
  SUBCASE("seeded and reproducible") {
    CHECK(calibration_to_json(calibrate(g, sys, quick())) == calibration_to_json(a));
  }
  SUBCASE("the calibration family itself passes with margin") {
    for (const auto& v : verify_inequalities(g, sys, a, a.seed, quick())) {
      CHECK(v.pass);
      CHECK(v.ratio() <= 0.5 * v.constant * (1 + 1e-12));
    }
  }
  SUBCASE("JSON round trip") {
    const auto path = std::filesystem::temp_directory_path() / "nsf_test_calibration.json";
    save_calibration(path.string(), a);
    const Calibration b = load_calibration(path.string());
    std::filesystem::remove(path);
    CHECK(b.seed == a.seed);
    CHECK(b.resolution == a.resolution);
    REQUIRE(b.entries.size() == a.entries.size());
    for (const auto& [id, e] : a.entries) {
      CHECK(b.at(id).constant == e.constant);
      CHECK(b.at(id).median == e.median);
      CHECK(b.at(id).samples == e.samples);
    }
    CHECK_THROWS(calibration_from_json("{\"seed\": \"nope\"}"));
    CHECK_THROWS(a.at("no_such_checker"));
  }
}
