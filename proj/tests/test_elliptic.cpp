#include "nsf/elliptic.hpp"
#include "nsf/fd.hpp"
#include "nsf/norms.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nsf;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLength = 2.0;

Grid channel(int n) { return Grid(ChannelDomain(kLength, 2), {n, n / 2}); }

double max_error(const ScalarField& a, const ScalarField& b) { return (a - b).cwiseAbs().maxCoeff(); }

double order(double coarse, double fine) { return std::log2(coarse / fine); }

// Slip manufactured field: u1 vanishes on the inflow and outflow faces, u2 on the walls.
struct SlipField {
  double a = kPi / kLength;

  Eigen::Vector3d u(const Point& x) const {
    return {std::sin(a * x[0]) * std::cos(kPi * x[1]), std::cos(a * x[0]) * std::sin(kPi * x[1]), 0.0};
  }
  Eigen::Matrix2d grad(const Point& x) const {  // grad(c, k) = d u_c / d x_k
    const double s1 = std::sin(a * x[0]), c1 = std::cos(a * x[0]);
    const double s2 = std::sin(kPi * x[1]), c2 = std::cos(kPi * x[1]);
    Eigen::Matrix2d g;
    g << a * c1 * c2, -kPi * s1 * s2, -a * s1 * s2, kPi * c1 * c2;
    return g;
  }
  Eigen::Vector3d rhs(const Point& x, const LameOperator& op) const {
    const double s1 = std::sin(a * x[0]), c1 = std::cos(a * x[0]);
    const double s2 = std::sin(kPi * x[1]), c2 = std::cos(kPi * x[1]);
    const double k2 = a * a + kPi * kPi;
    const Eigen::Matrix2d g = grad(x);
    const Eigen::Vector3d v = u(x);
    return {op.convection * g(0, 0) + op.mu * k2 * v[0] + op.grad_div * a * (a + kPi) * s1 * c2,
            op.convection * g(1, 0) + op.mu * k2 * v[1] + op.grad_div * kPi * (a + kPi) * c1 * s2, 0.0};
  }
  FaceVectorField traction(const Grid& grid, const LameOperator& op) const {
    FaceVectorField B = FaceVectorField::zeros(grid);
    for (int fid = 0; fid < grid.face_count(); ++fid) {
      const Face f = grid.face(fid);
      const double alpha = op.alpha[static_cast<int>(f.patch())];
      const auto& nodes = grid.face_nodes(fid);
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const Point x = grid.coord(nodes[q]);
        const Eigen::Matrix2d g = grad(x);
        const Eigen::Vector3d v = u(x);
        for (int c = 0; c < 2; ++c) {
          if (c == f.axis) continue;
          B.faces[fid](static_cast<Index>(q), c) =
              op.mu * f.outward_sign() * (g(c, f.axis) + g(f.axis, c)) + alpha * v[c];
        }
      }
    }
    return B;
  }
};

}  // namespace

TEST_CASE("Neumann solver") {
  SUBCASE("constants form the kernel") {
    const Grid g = channel(16);
    NeumannProblem pr{ScalarField::Zero(g.size()), BoundaryField::zeros(g), 5.0};
    const ScalarField u = solve_neumann(pr, g);
    CHECK(max_error(u, ScalarField::Constant(g.size(), 5.0)) < 1e-12);
  }
  SUBCASE("manufactured cosine converges at second order") {
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
      const Grid g = channel(n);
      const auto exact = [](const Point& x) { return std::cos(kPi * x[0] / kLength) * std::cos(kPi * x[1]); };
      const double k2 = kPi * kPi / (kLength * kLength) + kPi * kPi;
      NeumannProblem pr{sample(g, [&](const Point& x) { return -k2 * exact(x); }), BoundaryField::zeros(g), 0.0};
      err.push_back(max_error(solve_neumann(pr, g), sample(g, exact)));
    }
    CHECK(order(err[0], err[1]) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(order(err[1], err[2]) == doctest::Approx(2.0).epsilon(0.15));
  }
  SUBCASE("incompatible data are projected and the defect reported") {
    const Grid g = channel(16);
    NeumannProblem pr{ScalarField::Ones(g.size()), BoundaryField::zeros(g), 0.0};
    const NeumannResult r = NeumannSolver(g).solve(pr);
    CHECK(r.compatibility_defect == doctest::Approx(kLength));
    CHECK(inner(g, r.f_effective, ScalarField::Ones(g.size())) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.u.allFinite());
  }
  SUBCASE("mirror image across the outflow face reproduces the direct solution") {
    const Grid half = channel(16);
    const Grid full(ChannelDomain(2 * kLength, 2), {32, 8});
    auto source = [](const Point& x) { return std::cos(kPi * x[0] / kLength) * std::cos(kPi * x[1]); };
    NeumannProblem direct{sample(half, source), BoundaryField::zeros(half), 0.0};
    NeumannProblem mirrored{sample(full, [&](const Point& x) {
                              Point y = x;
                              if (y[0] > kLength) y[0] = 2 * kLength - y[0];
                              return source(y);
                            }),
                            BoundaryField::zeros(full), 0.0};
    const ScalarField a = solve_neumann(direct, half);
    const ScalarField b = solve_neumann(mirrored, full);
    CHECK(max_error(a, b.head(half.size())) < 1e-10);
  }
}

TEST_CASE("Robin temperature solver") {
  RobinParams rp;
  rp.r0 = 1.0;
  rp.kappa = 50.0;
  rp.L = {0.0, 0.0, 50.0};

  SUBCASE("homogeneous problem has the zero solution") {
    const Grid g = channel(16);
    const ScalarField eta = RobinSolver(g, rp).solve(ScalarField::Zero(g.size()));
    CHECK(eta.cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("manufactured cos(pi x2) converges at second order") {
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
      const Grid g = channel(n);
      const auto exact = [](const Point& x) { return std::cos(kPi * x[1]); };
      const ScalarField rhs = sample(g, [&](const Point& x) { return rp.kappa * kPi * kPi * exact(x); });
      const BoundaryField q = sample_boundary(g, [&](const Point& x, const Face& f) {
        return rp.L[static_cast<int>(f.patch())] * exact(x);  // the normal slope vanishes on every face
      });
      err.push_back(max_error(RobinSolver(g, rp).solve(rhs, &q), sample(g, exact)));
    }
    CHECK(order(err[0], err[1]) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(order(err[1], err[2]) == doctest::Approx(2.0).epsilon(0.15));
  }
  SUBCASE("solution scales like 1/kappa for a mean-free source") {
    const Grid g = channel(32);
    const ScalarField rhs = sample(g, [](const Point& x) { return std::cos(kPi * x[0] / kLength) * std::cos(kPi * x[1]); });
    RobinParams a = rp, b = rp;
    a.kappa = 400.0;
    b.kappa = 800.0;
    a.L = b.L = {0.0, 0.0, 1.0};
    const double ratio = norm_Lp(g, RobinSolver(g, a).solve(rhs), 2.0) / norm_Lp(g, RobinSolver(g, b).solve(rhs), 2.0);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
  }
  SUBCASE("operator application matches the assembled matrix") {
    const Grid g = channel(16);
    const ScalarField u = sample(g, [](const Point& x) { return std::exp(x[0]) * x[1] * (1 - x[1]) + x[1]; });
    const ColMatrix A = assemble_scalar_op(g, robin_op(rp));
    CHECK(max_error(apply_scalar_op(g, robin_op(rp), u), A * u) < 1e-9);
  }
}

TEST_CASE("Lame slip solver") {
  LameOperator op;
  op.mu = 1.0;
  op.grad_div = 1.0 / 3.0;
  op.alpha = {10.0, 10.0, 10.0};
  op.convection = 1.0;

  SUBCASE("zero data give zero velocity") {
    const Grid g = channel(16);
    const VectorField u = LameSolver(g, op).solve(VectorField::Zero(g.size(), 2), FaceVectorField::zeros(g));
    CHECK(u.cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("manufactured slip field converges at second order") {
    const SlipField m;
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
      const Grid g = channel(n);
      const VectorField F = sample_vector(g, [&](const Point& x) { return m.rhs(x, op); });
      const VectorField u = LameSolver(g, op).solve(F, m.traction(g, op));
      const VectorField exact = sample_vector(g, [&](const Point& x) { return m.u(x); });
      err.push_back((u - exact).cwiseAbs().maxCoeff());
      // Impermeability holds to rounding on the discrete level.
      for (Index p = 0; p < g.size(); ++p)
        for (int c = 0; c < 2; ++c)
          if (is_normal_row(g, p, c)) CHECK(std::abs(u(p, c)) < 1e-11);
    }
    CHECK(order(err[0], err[1]) == doctest::Approx(2.0).epsilon(0.15));
    CHECK(order(err[1], err[2]) == doctest::Approx(2.0).epsilon(0.15));
  }
  SUBCASE("residual form vanishes at the discrete solution") {
    const SlipField m;
    const Grid g = channel(16);
    const VectorField F = sample_vector(g, [&](const Point& x) { return m.rhs(x, op); });
    const FaceVectorField B = m.traction(g, op);
    const VectorField u = LameSolver(g, op).solve(F, B);
    VectorField expected = F;
    for (Index p = 0; p < g.size(); ++p)
      for (int c = 0; c < 2; ++c)
        if (is_normal_row(g, p, c)) expected(p, c) = 0.0;
    CHECK((apply_lame(g, op, u, B) - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("wall vorticity relation holds to first order") {
    const SlipField m;
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
      const Grid g = channel(n);
      const VectorField F = sample_vector(g, [&](const Point& x) { return m.rhs(x, op); });
      const FaceVectorField B = m.traction(g, op);
      const VectorField u = LameSolver(g, op).solve(F, B);
      const BoundaryField r = vorticity_wall_residual(g, u, B, op.mu, op.alpha[2]);
      double worst = 0.0;
      for (int fid : {2, 3}) worst = std::max(worst, r.faces[fid].cwiseAbs().maxCoeff());
      err.push_back(worst);
    }
    CHECK(order(err[0], err[1]) > 0.9);
    CHECK(order(err[1], err[2]) > 0.9);
  }
}

TEST_CASE("Helmholtz projection") {
  const Grid g = channel(32);
  const HelmholtzProjector helm(g);

  SUBCASE("gradient field has no solenoidal part") {
    const VectorField u = sample_vector(g, [](const Point& x) {
      const double a = kPi / kLength;
      return Eigen::Vector3d(-a * std::sin(a * x[0]) * std::cos(kPi * x[1]),
                             -kPi * std::cos(a * x[0]) * std::sin(kPi * x[1]), 0);
    });
    const HelmholtzParts parts = helm.decompose(u);
    CHECK(norm_Lp(g, parts.A, 2.0) < 0.02 * norm_Lp(g, u, 2.0));
  }
  SUBCASE("tangent divergence-free field has a nearly constant potential") {
    // Stream function sin^2(pi x1 / l) sin^2(pi x2) gives a field tangent to every face.
    const VectorField u = sample_vector(g, [](const Point& x) {
      const double a = kPi / kLength;
      const double s1 = std::sin(a * x[0]), s2 = std::sin(kPi * x[1]);
      return Eigen::Vector3d(2 * kPi * s1 * s1 * s2 * std::cos(kPi * x[1]),
                             -2 * a * s1 * std::cos(a * x[0]) * s2 * s2, 0);
    });
    const HelmholtzParts parts = helm.decompose(u);
    CHECK(norm_Lp(g, parts.grad_phi, 2.0) < 0.02 * norm_Lp(g, u, 2.0));
  }
  SUBCASE("parts are orthogonal and the projection is idempotent") {
    const VectorField u = sample_vector(g, [](const Point& x) {
      return Eigen::Vector3d(std::exp(x[1]) * x[0], std::sin(3 * x[0]) + x[1] * x[1], 0);
    });
    const HelmholtzParts parts = helm.decompose(u);
    CHECK(std::abs(inner(g, parts.grad_phi, parts.A)) < 1e-8 * inner(g, u, u));
    const HelmholtzParts again = helm.decompose(parts.A);
    CHECK(norm_Lp(g, again.grad_phi, 2.0) < 1e-8 * norm_Lp(g, u, 2.0));
    CHECK((again.A - parts.A).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("vorticity") {
  const Grid g = channel(16);
  const VectorField shear = sample_vector(g, [](const Point& x) { return Eigen::Vector3d(x[1], 0, 0); });
  CHECK((vorticity(shear, g).col(0).array() + 1.0).abs().maxCoeff() < 1e-12);

  const ScalarField phi = sample(g, [](const Point& x) { return std::sin(x[0]) * std::exp(x[1]); });
  CHECK(vorticity(gradient(g, phi), g).cwiseAbs().maxCoeff() < 1e-10);
}
