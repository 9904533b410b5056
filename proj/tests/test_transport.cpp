#include "nsf/transport.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nsf;

namespace {

constexpr double kPi = std::numbers::pi;

Grid channel(int n) { return Grid(ChannelDomain(2.0, 2), {n, n / 2}); }

TransportProblem at_rest(const Grid& g) {
  return {VectorField::Zero(g.size(), g.dim()), ScalarField::Zero(g.size()),
          Eigen::VectorXd::Zero(g.slice_size()), 0.0};
}

// Smooth perturbation, tangent to the walls.
VectorField swirl(const Grid& g, double eps) {
  return sample_vector(g, [eps](const Point& x) {
    return Eigen::Vector3d(eps * std::cos(x[0]) * x[1], eps * std::sin(kPi * x[1]) * (1 + 0.5 * x[0]), 0);
  });
}

}  // namespace

TEST_CASE("transport at rest") {
  const Grid g = channel(16);

  SUBCASE("constant inflow value is carried unchanged") {
    TransportProblem pr = at_rest(g);
    pr.w_in.setConstant(2.5);
    const ScalarField w = apply_S_marching(pr, g);
    CHECK((w.array() - 2.5).abs().maxCoeff() < 1e-15);
    const ScalarField c = apply_S_characteristic(pr, build_characteristics(pr, g), g);
    CHECK((c.array() - 2.5).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("unit source integrates to x1") {
    TransportProblem pr = at_rest(g);
    pr.h.setOnes();
    const ScalarField w = apply_S_marching(pr, g);
    const ScalarField x1 = sample(g, [](const Point& x) { return x[0]; });
    CHECK((w - x1).cwiseAbs().maxCoeff() < 1e-13);
    const ScalarField c = apply_S_characteristic(pr, build_characteristics(pr, g), g);
    CHECK((c - x1).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("damping gives the implicit Euler decay") {
    TransportProblem pr = at_rest(g);
    pr.w_in.setOnes();
    pr.gamma = 0.7;
    const ScalarField w = apply_S_marching(pr, g);
    for (Index p = 0; p < g.size(); ++p) {
      const int i = g.multi_index(p)[0];
      CHECK(w[p] == doctest::Approx(std::pow(1.0 + g.spacing(0) * pr.gamma, -i)).epsilon(1e-13));
    }
    const ScalarField c = apply_S_characteristic(pr, build_characteristics(pr, g), g);
    for (Index p = 0; p < g.size(); ++p)
      CHECK(c[p] == doctest::Approx(std::exp(-pr.gamma * g.coord(p)[0])).epsilon(1e-6));
  }
}

TEST_CASE("march inverts its difference operator") {
  const Grid g = channel(32);
  TransportProblem pr = at_rest(g);
  pr.U = swirl(g, 0.2);
  pr.gamma = 0.3;
  pr.h = sample(g, [](const Point& x) { return std::exp(-x[0]) * x[1]; });
  pr.w_in = sample(g, [](const Point& x) { return 1 + x[1] * x[1]; }).head(g.slice_size());
  const ScalarField w = apply_S_marching(pr, g);
  const ScalarField lhs = marching_operator(g, pr.U, w, pr.gamma);
  const Index m = g.slice_size();
  CHECK((lhs.head(g.size() - m) - pr.h.head(g.size() - m)).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("march is linear and preserves sign") {
  const Grid g = channel(32);
  std::mt19937_64 rng(1729);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  TransportProblem a = at_rest(g), b = at_rest(g);
  a.U = b.U = swirl(g, 0.3);
  for (Index p = 0; p < g.size(); ++p) {
    a.h[p] = U01(rng);
    b.h[p] = U01(rng);
  }
  for (Index q = 0; q < g.slice_size(); ++q) {
    a.w_in[q] = U01(rng);
    b.w_in[q] = U01(rng);
  }
  TransportProblem mix = a;
  mix.h = 2.0 * a.h - 3.0 * b.h;
  mix.w_in = 2.0 * a.w_in - 3.0 * b.w_in;
  const ScalarField wa = apply_S_marching(a, g), wb = apply_S_marching(b, g);
  CHECK((apply_S_marching(mix, g) - (2.0 * wa - 3.0 * wb)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(wa.minCoeff() >= 0.0);
  CHECK(wb.minCoeff() >= 0.0);
}

TEST_CASE("characteristics") {
  const Grid g = channel(16);

  SUBCASE("wall trajectories stay on the wall") {
    const VectorField U = swirl(g, 0.3);
    const CharacteristicMap map = build_characteristics(g, multilinear_sampler(g, U));
    for (const auto& tr : map.trajectories) {
      const double z = tr.x.front()[1];
      if (z != 0.0 && z != 1.0) continue;
      for (const auto& x : tr.x) CHECK(x[1] == z);
    }
    for (const auto& tr : map.trajectories) CHECK(tr.x.back()[0] == doctest::Approx(2.0));
  }
  SUBCASE("logistic lateral drift matches the closed form") {
    const double eps = 0.1;
    const VelocitySampler U = [eps](const Point& x) { return Eigen::Vector3d(0, eps * x[1] * (1 - x[1]), 0); };
    const CharacteristicMap map = build_characteristics(g, U);
    for (const auto& tr : map.trajectories) {
      const double z = tr.x.front()[1];
      const double s = tr.s.back();
      CHECK(tr.x.back()[1] == doctest::Approx(z / (z + (1 - z) * std::exp(-eps * s))).epsilon(1e-9));
    }
  }
  SUBCASE("multilinear interpolation reproduces bilinear functions") {
    const ScalarField f = sample(g, [](const Point& x) { return 1 + 2 * x[0] - x[1] + 0.5 * x[0] * x[1]; });
    for (const Point& x : {Point{0.33, 0.71, 0}, Point{1.99, 0.01, 0}, Point{0.0, 1.0, 0}})
      CHECK(multilinear(g, f, x) == doctest::Approx(1 + 2 * x[0] - x[1] + 0.5 * x[0] * x[1]));
  }
}

TEST_CASE("marching and characteristic solutions agree as the grid is refined") {
  std::vector<double> err;
  for (int n : {16, 32, 64}) {
    const Grid g = channel(n);
    TransportProblem pr = at_rest(g);
    pr.U = swirl(g, 0.1);
    pr.h = sample(g, [](const Point& x) { return std::cos(x[0]) * std::cos(kPi * x[1]); });
    pr.w_in = sample(g, [](const Point& x) { return std::cos(kPi * x[1]); }).head(g.slice_size());
    const ScalarField a = apply_S_marching(pr, g);
    const ScalarField b = apply_S_characteristic(pr, build_characteristics(pr, g), g);
    err.push_back((a - b).cwiseAbs().maxCoeff());
  }
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
  CHECK(std::log2(err[1] / err[2]) > 0.7);  // first order, still pre-asymptotic at 32
}

TEST_CASE("validation") {
  const Grid g = channel(16);
  CHECK(marching_courant(g, VectorField::Zero(g.size(), 2)) == 0.0);
  VectorField lateral = VectorField::Zero(g.size(), 2);
  for (Index p = 0; p < g.size(); ++p) {
    const int j = g.multi_index(p)[1];
    if (j > 0 && j < g.cells(1)) lateral(p, 1) = 0.1;
  }
  CHECK(marching_courant(g, lateral) == doctest::Approx(0.1 * g.spacing(0) / g.spacing(1)));
  CHECK_NOTHROW(validate_transport(g, lateral));

  VectorField leaky = lateral;
  leaky(0, 1) = 1e-6;
  CHECK_THROWS_AS(validate_transport(g, leaky), TransportError);

  VectorField reversed = VectorField::Zero(g.size(), 2);
  reversed(5, 0) = -0.6;
  CHECK_THROWS_AS(validate_transport(g, reversed), TransportError);

  VectorField fast = lateral * 30.0;
  TransportProblem pr = at_rest(g);
  pr.U = fast;
  CHECK_THROWS_AS(apply_S_marching(pr, g), TransportError);

  pr.U.setZero();
  pr.w_in = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(apply_S_marching(pr, g), TransportError);
}
