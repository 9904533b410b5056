#include "nsf/picard.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nsf;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
  Grid grid{ChannelDomain(2.0, 2), {16, 8}};
  PhysicalParams pp;
  ConstitutiveLaws laws = ideal_gas_defaults(1.0, 1.0);
};

FlowState smooth_state(const Grid& g, double eps) {
  FlowState s;
  s.u = sample_vector(g, [eps](const Point& x) {
    return Eigen::Vector3d(eps * std::sin(kPi * x[0] / 2) * std::cos(kPi * x[1]),
                           eps * x[0] * std::sin(kPi * x[1]), 0);
  });
  s.sigma = sample(g, [eps](const Point& x) { return eps * std::cos(x[0] + x[1]); });
  s.eta = sample(g, [eps](const Point& x) { return eps * x[1] * (1 - x[1]) * std::exp(-x[0]); });
  return s;
}

double max_abs(const FaceVectorField& b) {
  double m = 0.0;
  for (const auto& f : b.faces) m = std::max(m, f.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("assembled data at the zero state") {
  Setup s;
  SUBCASE("background data give vanishing right-hand sides") {
    const ProblemContext ctx(s.grid, s.pp, s.laws, background_data(s.grid, s.pp));
    const LinearProblemData lp = assemble_FGH(FlowState::zero(s.grid), ctx);
    CHECK(lp.F.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(lp.G.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(lp.H.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(max_abs(lp.B) < 1e-13);
    CHECK(lp.sigma_in.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("a body force enters the momentum data only") {
    ProblemData data = background_data(s.grid, s.pp);
    data.f.col(1) = sample(s.grid, [](const Point& x) { return 1e-3 * std::sin(x[0]) * x[1]; });
    const ProblemContext ctx(s.grid, s.pp, s.laws, data);
    const LinearProblemData lp = assemble_FGH(FlowState::zero(s.grid), ctx);
    CHECK((lp.F - data.f).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(lp.G.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(lp.H.cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("states outside the admissible box are rejected") {
    const ProblemContext ctx(s.grid, s.pp, s.laws, background_data(s.grid, s.pp));
    FlowState bad = FlowState::zero(s.grid);
    bad.sigma[7] = -0.95;
    CHECK_THROWS_AS(assemble_FGH(bad, ctx), StateError);
  }
}

TEST_CASE("linear step") {
  Setup s;
  const LinearSystem sys(s.grid, s.pp, linearization_constants(s.laws, s.pp));

  SUBCASE("zero data") {
    const LinearStepResult r = solve_linear_step(LinearProblemData::zero(s.grid), sys, FlowState::zero(s.grid));
    CHECK(r.report.converged);
    CHECK(weak_norm(s.grid, r.state) == 0.0);
  }
  SUBCASE("smooth data are solved to the residual tolerance") {
    LinearProblemData lp = LinearProblemData::zero(s.grid);
    lp.F = sample_vector(s.grid, [](const Point& x) { return Eigen::Vector3d(std::cos(x[1]), x[0] * x[1], 0); });
    lp.G = sample(s.grid, [](const Point& x) { return 0.1 * std::sin(x[0]); });
    lp.H = sample(s.grid, [](const Point& x) { return x[1] - 0.5; });
    lp.sigma_in = sample(s.grid, [](const Point& x) { return 0.01 * std::cos(kPi * x[1]); }).head(s.grid.slice_size());
    const LinearStepResult r = solve_linear_step(lp, sys, FlowState::zero(s.grid));
    CHECK(r.report.converged);
    CHECK(linear_residual(sys, lp, r.state).max_abs() < 1e-8);
    CHECK(r.report.residual_momentum < 1e-8);
  }
  SUBCASE("stagnation is reported") {
    LinearProblemData lp = LinearProblemData::zero(s.grid);
    lp.H.setOnes();
    LinearStepOptions opts;
    opts.tol = 0.0;
    opts.stagnation_ratio = 0.0;
    opts.stagnation_window = 1;
    CHECK_THROWS_AS(solve_linear_step(lp, sys, FlowState::zero(s.grid), opts), StagnationError);
  }
}

TEST_CASE("physical reconstruction round trip") {
  Setup s;
  ProblemData data = background_data(s.grid, s.pp);
  data.g = sample_boundary(s.grid, [](const Point& x, const Face& f) {
    return f.patch() == Patch::Wall ? 0.01 * std::cos(x[0]) : 0.0;
  });
  const ProblemContext ctx(s.grid, s.pp, s.laws, data);
  const FlowState st = smooth_state(s.grid, 0.05);
  const FlowState back = perturbation_of(reconstruct_physical(st, ctx), ctx);
  CHECK(weak_distance(s.grid, st, back) < 1e-12);
  const PhysicalState ph = reconstruct_physical(FlowState::zero(s.grid), ctx);
  CHECK((ph.v.col(0).array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((ph.rho.array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("norms of states") {
  Setup s;
  const FlowState a = smooth_state(s.grid, 0.1), b = smooth_state(s.grid, 0.05);
  CHECK(weak_norm(s.grid, FlowState::zero(s.grid)) == 0.0);
  CHECK(weak_norm(s.grid, a) == doctest::Approx(2.0 * weak_norm(s.grid, b)));
  CHECK(weak_distance(s.grid, a, b) == doctest::Approx(weak_distance(s.grid, b, a)));
  CHECK(strong_norm(s.grid, a, 4.0) >= 0.0);
  CHECK(strong_norm(s.grid, a, 4.0) == doctest::Approx(2.0 * strong_norm(s.grid, b, 4.0)));
}

TEST_CASE("Picard iteration") {
  Setup s;
  SUBCASE("background data converge in one step") {
    const ProblemContext ctx(s.grid, s.pp, s.laws, background_data(s.grid, s.pp));
    const PicardResult r = picard_iterate(FlowState::zero(s.grid), ctx);
    CHECK(r.report.converged);
    CHECK(r.report.steps.size() == 1);
    CHECK(r.report.D0 == 0.0);
    CHECK(weak_norm(s.grid, r.state) < 1e-12);
  }
  SUBCASE("small data contract to a unique fixed point") {
    ProblemData data = background_data(s.grid, s.pp);
    data.f.col(1) = sample(s.grid, [](const Point& x) { return 1e-3 * std::sin(kPi * x[0] / 2) * x[1]; });
    const ProblemContext ctx(s.grid, s.pp, s.laws, data);
    int calls = 0;
    const PicardResult r = picard_iterate(FlowState::zero(s.grid), ctx, {}, [&](const IterationRecord&) { ++calls; });
    CHECK(r.report.converged);
    CHECK(calls == static_cast<int>(r.report.steps.size()));
    CHECK(r.report.max_q(2) < 1.0);
    CHECK(uniqueness_probe(ctx, FlowState::zero(s.grid), smooth_state(s.grid, 0.05)) < 1e-8);
  }
  SUBCASE("inadmissible start is reported as divergence") {
    const ProblemContext ctx(s.grid, s.pp, s.laws, background_data(s.grid, s.pp));
    FlowState bad = FlowState::zero(s.grid);
    bad.sigma.setConstant(-0.95);
    const PicardResult r = picard_iterate(bad, ctx);
    CHECK(r.report.diverged);
    CHECK_FALSE(r.report.converged);
    CHECK(r.report.failure.find("admissible box") != std::string::npos);
  }
}
