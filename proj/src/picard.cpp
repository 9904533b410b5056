#include "nsf/picard.hpp"

#include "nsf/fd.hpp"
#include "nsf/transport.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nsf {

FlowState FlowState::zero(const Grid& grid) {
  return {VectorField::Zero(grid.size(), grid.dim()), ScalarField::Zero(grid.size()),
          ScalarField::Zero(grid.size())};
}

LinearProblemData LinearProblemData::zero(const Grid& grid) {
  LinearProblemData d;
  d.F = VectorField::Zero(grid.size(), grid.dim());
  d.G = ScalarField::Zero(grid.size());
  d.H = ScalarField::Zero(grid.size());
  d.B = FaceVectorField::zeros(grid);
  d.sigma_in = Eigen::VectorXd::Zero(grid.slice_size());
  d.U = VectorField::Zero(grid.size(), grid.dim());
  return d;
}

LinearSystem::LinearSystem(const Grid& grid, const PhysicalParams& pp,
                           const LinearizationConstants& lin)
    : grid_(&grid), pp_(pp), lin_(lin) {
  lame_ = std::make_shared<LameSolver>(grid, lame_operator());
  robin_ = std::make_shared<RobinSolver>(grid, robin_params());
}

LameOperator LinearSystem::lame_operator() const {
  LameOperator op;
  op.mu = pp_.mu;
  op.grad_div = pp_.grad_div();
  op.alpha = {pp_.alpha, pp_.alpha, pp_.alpha};
  op.convection = 1.0;
  return op;
}

RobinParams LinearSystem::robin_params() const {
  RobinParams rp;
  rp.r0 = lin_.r0;
  rp.kappa = pp_.kappa;
  for (Patch pt : {Patch::Inflow, Patch::Outflow, Patch::Wall}) rp.L[static_cast<int>(pt)] = pp_.L(pt);
  return rp;
}

double weak_norm(const Grid& grid, const FlowState& s) {
  return norm_W1p(grid, s.u, 2.0) + sup_slice_L2_norm(grid, s.sigma) + norm_W1p(grid, s.eta, 2.0);
}

double weak_distance(const Grid& grid, const FlowState& a, const FlowState& b) {
  return weak_norm(grid, {a.u - b.u, a.sigma - b.sigma, a.eta - b.eta});
}

double strong_norm(const Grid& grid, const FlowState& s, double p) {
  return norm_W2p(grid, s.u, p) + norm_W1p(grid, s.sigma, p) + norm_W2p(grid, s.eta, p);
}

double LinearResidual::max_abs() const {
  double m = 0.0;
  if (momentum.size()) m = std::max(m, momentum.cwiseAbs().maxCoeff());
  if (continuity.size()) m = std::max(m, continuity.cwiseAbs().maxCoeff());
  if (energy.size()) m = std::max(m, energy.cwiseAbs().maxCoeff());
  if (inflow.size()) m = std::max(m, inflow.cwiseAbs().maxCoeff());
  return m;
}

LinearResidual linear_residual(const LinearSystem& sys, const LinearProblemData& data,
                               const FlowState& s) {
  const Grid& g = sys.grid();
  const auto& lin = sys.constants();
  LinearResidual r;
  r.momentum = apply_lame(g, sys.lame_operator(), s.u, data.B);
  const VectorField ds = gradient(g, s.sigma);
  const VectorField de = gradient(g, s.eta);
  for (int c = 0; c < g.dim(); ++c)
    for (Index p = 0; p < g.size(); ++p)
      if (!is_normal_row(g, p, c)) r.momentum(p, c) += lin.p1 * ds(p, c) + lin.p2 * de(p, c) - data.F(p, c);

  const ScalarField divu = divergence(g, s.u);
  r.continuity = marching_operator(g, data.U, s.sigma) + divu - data.G;
  r.continuity.tail(g.slice_size()).setZero();
  r.inflow = s.sigma.head(g.slice_size()) - data.sigma_in;

  r.energy = apply_scalar_op(g, robin_op(sys.robin_params()), s.eta) + lin.r1 * divu - data.H;
  return r;
}

LinearStepResult solve_linear_step(const LinearProblemData& data, const LinearSystem& sys,
                                   const FlowState& initial, const LinearStepOptions& opts) {
  const Grid& g = sys.grid();
  const auto& lin = sys.constants();
  validate_transport(g, data.U);

  LinearStepResult out;
  FlowState s = initial;
  double prev = std::numeric_limits<double>::infinity();
  int slow = 0;
  TransportProblem tp;
  tp.U = data.U;
  tp.w_in = data.sigma_in;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    FlowState next;
    const VectorField rhs_u = data.F - lin.p1 * gradient(g, s.sigma) - lin.p2 * gradient(g, s.eta);
    next.u = sys.lame().solve(rhs_u, data.B);
    const ScalarField divu = divergence(g, next.u);
    tp.h = data.G - divu;
    next.sigma = apply_S_marching(tp, g);
    next.eta = sys.robin().solve(data.H - lin.r1 * divu);

    const double inc = weak_distance(g, next, s);
    s = std::move(next);
    out.report.sweeps = sweep;
    out.report.increments.push_back(inc);
    out.report.last_increment = inc;
    if (inc < opts.tol) {
      out.report.converged = true;
      break;
    }
    slow = (std::isfinite(prev) && inc >= opts.stagnation_ratio * prev) ? slow + 1 : 0;
    if (slow >= opts.stagnation_window) {
      std::ostringstream os;
      os << "linear step stagnated: increment " << inc << " after " << sweep << " sweeps";
      throw StagnationError(os.str());
    }
    if (!std::isfinite(inc)) throw StagnationError("linear step produced non-finite values");
    prev = inc;
  }

  const LinearResidual r = linear_residual(sys, data, s);
  out.report.residual_momentum = r.momentum.cwiseAbs().maxCoeff();
  out.report.residual_continuity =
      std::max(r.continuity.cwiseAbs().maxCoeff(), r.inflow.cwiseAbs().maxCoeff());
  out.report.residual_energy = r.energy.cwiseAbs().maxCoeff();
  out.state = std::move(s);
  return out;
}

ProblemContext::ProblemContext(const Grid& grid, const PhysicalParams& pp,
                               const ConstitutiveLaws& laws, const ProblemData& data, double p)
    : grid_(&grid), pp_(pp), laws_(laws), data_(data), p_(p) {
  bg_ = build_background(grid, data, pp, laws);
  lift_ = build_lift_for(data, grid);
  sys_ = std::make_shared<LinearSystem>(grid, pp, linearization_constants(laws, pp));
  D0_ = data_distance_D0(grid, data, pp, p);
  theta_bar_ = bg_.theta();
  lift_stress_ = tangential_stress(grid, lift_.u0, pp.mu);
  lift_div_stress_ = stress_divergence(grid, lift_.u0, lift_stress_, pp.mu, pp.grad_div());
}

namespace {

void check_box(const Grid& g, const StateBox& box, const ScalarField& rho, const ScalarField& theta) {
  for (Index p = 0; p < g.size(); ++p) {
    if (box.contains(rho[p], theta[p])) continue;
    std::ostringstream os;
    os << "state leaves the admissible box at node " << p << " (x = "
       << g.coord(p).head(g.dim()).transpose() << "): rho = " << rho[p] << ", theta = " << theta[p];
    throw StateError(os.str());
  }
}

}  // namespace

LinearProblemData assemble_FGH(const FlowState& s, const ProblemContext& ctx) {
  const Grid& g = ctx.grid();
  const int d = g.dim();
  const Index n = g.size();
  const auto& pp = ctx.params();
  const auto& laws = ctx.laws();
  const auto& lin = ctx.system().constants();
  const VectorField& u0 = ctx.lift().u0;

  const VectorField w = s.u + u0;
  const ScalarField rho = (1.0 + s.sigma.array()).matrix();
  const ScalarField theta = ctx.theta_bar() + s.eta;
  check_box(g, laws.box, rho, theta);

  std::vector<VectorField> Dw(d);
  for (int c = 0; c < d; ++c) Dw[c] = gradient(g, w.col(c));
  const VectorField Dsig = gradient(g, s.sigma);
  const VectorField Dth = gradient(g, theta);
  const VectorField Deta = gradient(g, s.eta);
  const ScalarField divu = divergence(g, s.u);
  const ScalarField divu0 = divergence(g, u0);
  VectorField D1u0(n, d);
  for (int c = 0; c < d; ++c) D1u0.col(c) = derivative(g, u0.col(c), 0);

  LinearProblemData out;
  out.F.resize(n, d);
  out.G.resize(n);
  out.H.resize(n);
  Eigen::MatrixXd grad(d, d);
  for (Index p = 0; p < n; ++p) {
    const double sg = s.sigma[p];
    const double pr_rho = laws.pressure.d_rho(rho[p], theta[p]);
    const double pr_th = laws.pressure.d_theta(rho[p], theta[p]);
    const double e_th = laws.energy.c_v + laws.energy.d_theta(rho[p], theta[p]);
    for (int c = 0; c < d; ++c) {
      double conv = 0.0;
      for (int k = 0; k < d; ++k) conv += w(p, k) * Dw[c](p, k);
      out.F(p, c) = rho[p] * ctx.data().f(p, c) - D1u0(p, c) + ctx.lift_stress_divergence()(p, c) - conv -
                    sg * (Dw[c](p, 0) + conv) - (pr_rho - lin.p1) * Dsig(p, c) - pr_th * Dth(p, c) +
                    lin.p2 * Deta(p, c);
      for (int k = 0; k < d; ++k) grad(c, k) = Dw[c](p, k);
    }
    out.G[p] = -rho[p] * divu0[p] - sg * divu[p];

    double adv = 0.0;
    for (int k = 0; k < d; ++k) adv += w(p, k) * Dth(p, k);
    const Eigen::MatrixXd S = stress_tensor(grad, pp.mu, pp.lambda);
    const double dissipation = (S.array() * grad.array()).sum();
    out.H[p] = lin.r0 * Dth(p, 0) - rho[p] * e_th * (Dth(p, 0) + adv) + lin.r1 * divu[p] -
               theta[p] * pr_th * (divu[p] + divu0[p]) + dissipation;
  }

  out.B = FaceVectorField::zeros(g);
  for (int fid = 0; fid < g.face_count(); ++fid) {
    const Face f = g.face(fid);
    const auto& nodes = g.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const auto qi = static_cast<Index>(q);
      for (int c = 0; c < d; ++c) {
        if (c == f.axis) continue;
        const double unit = c == 0 ? 1.0 : 0.0;
        out.B.faces[fid](qi, c) = ctx.data().b.faces[fid](qi, c) - ctx.lift_stress().faces[fid](qi, c) -
                                  pp.alpha * (unit + u0(nodes[q], c));
      }
    }
  }
  out.sigma_in = (ctx.data().rho_in.array() - 1.0).matrix();
  out.U = w;
  return out;
}

double IterationReport::max_q(int from_index) const {
  double m = 0.0;
  for (const auto& r : steps)
    if (std::isfinite(r.q) && r.step - 1 >= from_index) m = std::max(m, r.q);
  return m;
}

PicardResult picard_iterate(const FlowState& initial, const ProblemContext& ctx,
                            const PicardOptions& opts, const StepCallback& on_step) {
  const Grid& g = ctx.grid();
  PicardResult out;
  out.state = initial;
  auto& rep = out.report;
  rep.D0 = ctx.D0();
  rep.warnings = ctx.background().warnings;

  double A_prev = strong_norm(g, initial, ctx.p());
  double A1 = 0.0;
  double delta_prev = 0.0;
  for (int n = 1; n <= opts.max_iter; ++n) {
    IterationRecord rec;
    rec.step = n;
    LinearStepResult step;
    try {
      const LinearProblemData data = assemble_FGH(out.state, ctx);
      step = solve_linear_step(data, ctx.system(), out.state, opts.inner);
    } catch (const StateError& e) {
      rep.diverged = true;
      rep.failure = e.what();
      return out;
    } catch (const TransportError& e) {
      rep.diverged = true;
      rep.failure = std::string("transport: ") + e.what();
      return out;
    } catch (const StagnationError& e) {
      rep.diverged = true;
      rep.failure = e.what();
      return out;
    }
    rec.inner_sweeps = step.report.sweeps;
    rec.inner_increment = step.report.last_increment;
    rec.residual_momentum = step.report.residual_momentum;
    rec.residual_continuity = step.report.residual_continuity;
    rec.residual_energy = step.report.residual_energy;
    if (!step.report.converged) {
      std::ostringstream os;
      os << "step " << n << ": linear step stopped after " << step.report.sweeps
         << " sweeps with increment " << step.report.last_increment;
      rep.warnings.push_back(os.str());
    }

    rec.delta = weak_distance(g, step.state, out.state);
    rec.A = strong_norm(g, step.state, ctx.p());
    if (n > 1 && delta_prev > 1e-14) rec.q = rec.delta / delta_prev;
    const double denom = A_prev * A_prev + A_prev * A_prev * A_prev + rep.D0;
    if (denom > 0.0) {
      rec.recursion_ratio = rec.A / denom;
      rep.recursion_C = std::max(rep.recursion_C, rec.recursion_ratio);
    }
    out.state = std::move(step.state);
    rep.steps.push_back(rec);
    if (on_step) on_step(rec);

    if (!std::isfinite(rec.A) || !std::isfinite(rec.delta)) {
      rep.diverged = true;
      rep.failure = "iterate is not finite";
      return out;
    }
    if (n == 1) A1 = rec.A;
    if (rec.A > 10.0 * A1 + 1.0) {
      rep.diverged = true;
      std::ostringstream os;
      os << "iterate norm " << rec.A << " exceeds 10 A_1 + 1 = " << 10.0 * A1 + 1.0;
      rep.failure = os.str();
      return out;
    }
    const double rho_min = 1.0 + out.state.sigma.minCoeff();
    if (rho_min < opts.rho_min) {
      rep.diverged = true;
      std::ostringstream os;
      os << "density dropped to " << rho_min;
      rep.failure = os.str();
      return out;
    }
    if (rec.delta < opts.tol) {
      rep.converged = true;
      return out;
    }
    A_prev = rec.A;
    delta_prev = rec.delta;
  }
  std::ostringstream os;
  os << "no convergence within " << opts.max_iter << " iterations";
  rep.failure = os.str();
  return out;
}

PhysicalState reconstruct_physical(const FlowState& s, const ProblemContext& ctx) {
  PhysicalState ph;
  ph.v = s.u + ctx.lift().u0;
  ph.v.col(0).array() += 1.0;
  ph.rho = (1.0 + s.sigma.array()).matrix();
  ph.theta = ctx.theta_bar() + s.eta;
  return ph;
}

FlowState perturbation_of(const PhysicalState& ph, const ProblemContext& ctx) {
  FlowState s;
  s.u = ph.v - ctx.lift().u0;
  s.u.col(0).array() -= 1.0;
  s.sigma = (ph.rho.array() - 1.0).matrix();
  s.eta = ph.theta - ctx.theta_bar();
  return s;
}

double uniqueness_probe(const ProblemContext& ctx, const FlowState& start_a,
                        const FlowState& start_b, const PicardOptions& opts) {
  const PicardResult a = picard_iterate(start_a, ctx, opts);
  if (!a.report.converged) throw std::runtime_error("first start did not converge: " + a.report.failure);
  const PicardResult b = picard_iterate(start_b, ctx, opts);
  if (!b.report.converged) throw std::runtime_error("second start did not converge: " + b.report.failure);
  return weak_distance(ctx.grid(), a.state, b.state);
}

TransIdentity trans_identity(const LinearSystem& sys, const LinearProblemData& data,
                             const FlowState& sol, const HelmholtzProjector& helm) {
  const Grid& g = sys.grid();
  const auto& pp = sys.params();
  const auto& lin = sys.constants();
  const int d = g.dim();
  const double bulk = pp.bulk();
  const HelmholtzParts parts = helm.decompose(sol.u);
  const VectorField De = gradient(g, sol.eta);
  VectorField R(g.size(), d);
  for (int c = 0; c < d; ++c)
    R.col(c) = data.F.col(c) - derivative(g, parts.A.col(c), 0) + pp.mu * laplacian(g, parts.A.col(c)) -
               derivative(g, parts.grad_phi.col(c), 0) - lin.p2 * De.col(c);
  const ScalarField divu = divergence(g, sol.u);
  const double mean_value = mean(g, (-bulk * divu + lin.p1 * sol.sigma).eval());
  const ScalarField Kbar = helm.fit_potential(R, mean_value);

  TransIdentity t;
  t.K = Kbar / bulk + data.G;
  const VectorField Ds = gradient(g, sol.sigma);
  t.residual = damping_gamma(pp, lin.p1) * sol.sigma + Ds.col(0) - t.K;
  for (int k = 0; k < d; ++k) t.residual.array() += data.U.col(k).array() * Ds.col(k).array();
  t.l2 = norm_Lp(g, t.residual, 2.0);
  return t;
}

}  // namespace nsf
