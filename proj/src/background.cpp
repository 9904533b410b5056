#include "nsf/background.hpp"

#include "nsf/fd.hpp"
#include "nsf/norms.hpp"

#include <sstream>

namespace nsf {

double compute_cg(const BoundaryField& g, const Grid& grid) {
  return boundary_integral(grid, g) / grid.domain().volume();
}

Theta0Result solve_theta0(const BoundaryField& g, double T0, double kappa, const Grid& grid) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  Theta0Result r;
  r.c_g = compute_cg(g, grid);
  NeumannProblem pr;
  pr.f = ScalarField::Constant(grid.size(), -r.c_g / kappa);
  pr.flux = g;
  pr.flux *= 1.0 / kappa;
  pr.mean = T0;
  const NeumannResult res = NeumannSolver(grid).solve(pr);
  r.theta0 = res.u;
  r.compatibility_defect = res.compatibility_defect;
  r.c_g_effective = -kappa * res.f_effective[0];
  return r;
}

ScalarField solve_theta1(const ScalarField& theta0, double c_g, const BoundaryField& T1,
                         const PhysicalParams& pp, double r0, const Grid& grid) {
  RobinParams rp;
  rp.r0 = r0;
  rp.kappa = pp.kappa;
  for (Patch pt : {Patch::Inflow, Patch::Outflow, Patch::Wall}) rp.L[static_cast<int>(pt)] = pp.L(pt);
  BoundaryField q = BoundaryField::zeros(grid);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const double L = pp.L(grid.face(fid).patch());
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto q_idx = static_cast<Index>(k);
      q.faces[fid][q_idx] = L * (T1.faces[fid][q_idx] + pp.T0 - theta0[nodes[k]]);
    }
  }
  const ScalarField rhs = -r0 * derivative(grid, theta0, 0) - ScalarField::Constant(grid.size(), c_g);
  return RobinSolver(grid, rp).solve(rhs, &q);
}

BackgroundState build_background(const Grid& grid, const ProblemData& data,
                                 const PhysicalParams& pp, const ConstitutiveLaws& laws) {
  BackgroundState bg;
  bg.T0 = pp.T0;
  const Theta0Result t0 = solve_theta0(data.g, pp.T0, pp.kappa, grid);
  bg.theta0 = t0.theta0;
  bg.c_g = t0.c_g;
  bg.c_g_effective = t0.c_g_effective;
  bg.compatibility_defect = t0.compatibility_defect;
  const double r0 = 1.0 + laws.energy.e2;
  bg.theta1 = solve_theta1(bg.theta0, bg.c_g_effective, data.T1, pp, r0, grid);

  const double bound = 10.0 * (trace_norm(grid, data.T1, 2.0) + trace_norm(grid, data.g, 2.0));
  const double n1 = norm_W1p(grid, bg.theta1, 2.0);
  if (n1 > bound + 1e-14) {
    std::ostringstream os;
    os << "theta1 W^1_2 norm " << n1 << " exceeds 10 x data trace norm " << bound;
    bg.warnings.push_back(os.str());
  }
  return bg;
}

LiftField build_lift(const BoundaryField& flux, const Grid& grid) {
  LiftField lift;
  lift.source = boundary_integral(grid, flux) / grid.domain().volume();
  NeumannProblem pr;
  pr.f = ScalarField::Constant(grid.size(), lift.source);
  pr.flux = flux;
  pr.mean = 0.0;
  const NeumannResult res = NeumannSolver(grid).solve(pr);
  lift.phi = res.u;
  lift.compatibility_defect = res.compatibility_defect;
  lift.u0 = gradient(grid, lift.phi);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t k = 0; k < nodes.size(); ++k)
      lift.u0(nodes[k], f.axis) = f.outward_sign() * flux.faces[fid][static_cast<Index>(k)];
  }
  return lift;
}

LiftField build_lift_for(const ProblemData& data, const Grid& grid) {
  BoundaryField flux = data.d;
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    if (f.axis == 0) flux.faces[fid].array() -= f.outward_sign();
  }
  return build_lift(flux, grid);
}

double data_distance_D0(const Grid& grid, const ProblemData& data, const PhysicalParams& pp,
                        double p) {
  double D0 = norm_Lp(grid, data.f, p);
  for (int c = 0; c < grid.dim(); ++c) {
    BoundaryField bc = BoundaryField::zeros(grid);
    for (int fid = 0; fid < grid.face_count(); ++fid) {
      const Face f = grid.face(fid);
      if (c == f.axis) continue;
      bc.faces[fid] = data.b.faces[fid].col(c);
      if (c == 0) bc.faces[fid].array() -= pp.alpha;
    }
    D0 += trace_norm(grid, bc, p);
  }
  BoundaryField dd = data.d;
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    if (f.axis == 0) dd.faces[fid].array() -= f.outward_sign();
  }
  D0 += trace_norm(grid, dd, p);
  D0 += inflow_W1p(grid, (data.rho_in.array() - 1.0).matrix(), p);
  D0 += trace_norm(grid, data.g, p);
  D0 += trace_norm(grid, data.T1, p);
  return D0;
}

}  // namespace nsf
