#include "nsf/diagnostics.hpp"

#include "nsf/elliptic.hpp"
#include "nsf/fd.hpp"
#include "nsf/norms.hpp"
#include "nsf/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsf {

double InequalityVerdict::ratio() const {
  if (rhs > 0.0) return lhs / rhs;
  return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

InequalityVerdict make_verdict(const std::string& id, const InequalitySides& s, double constant,
                               double median_ratio) {
  InequalityVerdict v;
  v.id = id;
  v.lhs = s.lhs;
  v.rhs = s.rhs;
  v.constant = constant;
  const double slack = 1e-12 * std::max(std::abs(s.lhs), std::abs(constant * s.rhs)) + 1e-300;
  v.pass = s.lhs <= constant * s.rhs + slack;
  if (median_ratio > 0.0 && v.ratio() > 10.0 * median_ratio) {
    v.outlier = true;
    v.pass = false;
    v.note = "ratio exceeds 10x the calibration median";
  }
  return v;
}

BoundaryField boundary_trace(const Grid& grid, const ScalarField& f) {
  BoundaryField t = BoundaryField::zeros(grid);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) t.faces[fid][static_cast<Index>(q)] = f[nodes[q]];
  }
  return t;
}

double patch_L2(const Grid& grid, const ScalarField& f, const std::vector<Patch>& patches) {
  const BoundaryField t = boundary_trace(grid, f);
  double s = 0.0;
  for (Patch p : patches) s += std::pow(boundary_Lp(grid, t, 2.0, p), 2);
  return std::sqrt(s);
}

namespace {

double grad_sq(const Grid& grid, const ScalarField& u) {
  double s = 0.0;
  for (int k = 0; k < grid.dim(); ++k) s += std::pow(norm_Lp(grid, derivative(grid, u, k), 2.0), 2);
  return s;
}

}  // namespace

InequalitySides poincare_boundary_sides(const Grid& grid, const ScalarField& u,
                                        const std::vector<Patch>& g1, const std::vector<Patch>& g2) {
  return {std::pow(patch_L2(grid, u, g1), 2), std::pow(patch_L2(grid, u, g2), 2) + grad_sq(grid, u)};
}

InequalitySides poincare_volume_sides(const Grid& grid, const ScalarField& u,
                                      const std::vector<Patch>& g1) {
  return {std::pow(norm_Lp(grid, u, 2.0), 2), std::pow(patch_L2(grid, u, g1), 2) + grad_sq(grid, u)};
}

std::vector<Patch> poincare_boundary_target() { return {Patch::Inflow, Patch::Outflow}; }
std::vector<Patch> poincare_boundary_control() { return {Patch::Wall}; }
std::vector<Patch> poincare_volume_control() { return {Patch::Inflow}; }

InequalitySides korn_sides(const Grid& grid, const VectorField& u, double mu, double alpha) {
  const int d = grid.dim();
  std::vector<VectorField> Du(d);
  for (int c = 0; c < d; ++c) Du[c] = gradient(grid, u.col(c));
  double volume = 0.0;
  Eigen::MatrixXd D(d, d);
  for (Index p = 0; p < grid.size(); ++p) {
    for (int c = 0; c < d; ++c)
      for (int k = 0; k < d; ++k) D(c, k) = Du[c](p, k);
    const Eigen::MatrixXd sym =
        D + D.transpose() - (2.0 / 3.0) * D.trace() * Eigen::MatrixXd::Identity(d, d);
    volume += grid.weight(p) * mu * sym.squaredNorm();
  }
  double boundary = 0.0;
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    const auto& nodes = grid.face_nodes(fid);
    const auto& w = grid.face_weights(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        const double v = u(nodes[q], c);
        s += c == f.axis ? v * v : alpha * v * v;
      }
      boundary += w[static_cast<Index>(q)] * s;
    }
  }
  return {std::pow(norm_W1p(grid, u, 2.0), 2), volume + boundary};
}

InequalitySides interpolation_sides(const Grid& grid, const ScalarField& f, double eps, double p) {
  double grad = 0.0;
  for (int k = 0; k < grid.dim(); ++k) grad += std::pow(norm_Lp(grid, derivative(grid, f, k), p), p);
  return {norm_Lp(grid, f, p) - eps * std::pow(grad, 1.0 / p), norm_Lp(grid, f, 2.0)};
}

InequalitySides energy_sides(const Grid& grid, const LinearProblemData& data, const FlowState& sol) {
  InequalitySides s;
  s.lhs = weak_norm(grid, sol);
  double b = 0.0;
  for (int c = 0; c < grid.dim(); ++c) {
    BoundaryField bc = BoundaryField::zeros(grid);
    for (int fid = 0; fid < grid.face_count(); ++fid)
      if (grid.face(fid).axis != c) bc.faces[fid] = data.B.faces[fid].col(c);
    b += boundary_Lp(grid, bc, 2.0);
  }
  s.rhs = riesz_dual_norm(grid, data.F) + norm_Lp(grid, data.G, 2.0) + norm_Lp(grid, data.H, 2.0) + b +
          inflow_L2(grid, data.sigma_in);
  return s;
}

InequalitySides transport_sides(const Grid& grid, const Eigen::VectorXd& w_in, const ScalarField& h,
                                const ScalarField& w) {
  return {sup_slice_L2_norm(grid, w), inflow_L2(grid, w_in) + norm_Lp(grid, h, 2.0)};
}

// ---------------------------------------------------------------------------

double scaled_L2(const Grid& grid, const ScalarField& f) {
  return norm_Lp(grid, f, 2.0) / std::sqrt(grid.domain().volume());
}

double scaled_L2(const Grid& grid, const VectorField& f) {
  return norm_Lp(grid, f, 2.0) / std::sqrt(grid.domain().volume());
}

double scaled_boundary_L2(const Grid& grid, const BoundaryField& f, const std::vector<Patch>& patches) {
  double s = 0.0, m = 0.0;
  for (Patch p : patches) {
    s += std::pow(boundary_Lp(grid, f, 2.0, p), 2);
    m += grid.domain().patch_measure(p);
  }
  return m > 0.0 ? std::sqrt(s / m) : 0.0;
}

double MainSystemResidual::pde_max() const {
  return std::max({norms.at("momentum"), norms.at("continuity"), norms.at("energy")});
}

double MainSystemResidual::bc_max() const {
  double m = 0.0;
  for (const auto& [k, v] : norms)
    if (k.rfind("bc_", 0) == 0) m = std::max(m, v);
  return m;
}

MainSystemResidual residual_main_system(const Grid& grid, const PhysicalState& st,
                                        const ProblemData& data, const ConstitutiveLaws& laws,
                                        const PhysicalParams& pp) {
  const int d = grid.dim();
  const Index n = grid.size();
  const VectorField& v = st.v;
  const ScalarField& rho = st.rho;
  const ScalarField& th = st.theta;

  std::vector<VectorField> Dv(d);
  for (int c = 0; c < d; ++c) Dv[c] = gradient(grid, v.col(c));
  const VectorField Drho = gradient(grid, rho);
  const VectorField Dth = gradient(grid, th);
  const ScalarField divv = divergence(grid, v);

  // Stress divergence with the slip relation as ghost rule: tangential stress b - alpha v_tau.
  FaceVectorField traction = data.b;
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q)
      for (int c = 0; c < d; ++c)
        traction.faces[fid](static_cast<Index>(q), c) -= pp.alpha * v(nodes[q], c);
  }
  const VectorField divS = stress_divergence(grid, v, traction, pp.mu, pp.grad_div());

  MainSystemResidual r;
  r.momentum = VectorField::Zero(n, d);
  r.energy.resize(n);
  Eigen::MatrixXd grad(d, d);
  for (Index p = 0; p < n; ++p) {
    const double pr_rho = laws.pressure.d_rho(rho[p], th[p]);
    const double pr_th = laws.pressure.d_theta(rho[p], th[p]);
    const double e_th = laws.energy.c_v + laws.energy.d_theta(rho[p], th[p]);
    for (int c = 0; c < d; ++c) {
      for (int k = 0; k < d; ++k) grad(c, k) = Dv[c](p, k);
      if (is_normal_row(grid, p, c)) continue;
      double conv = 0.0;
      for (int k = 0; k < d; ++k) conv += v(p, k) * Dv[c](p, k);
      r.momentum(p, c) = rho[p] * conv - divS(p, c) + pr_rho * Drho(p, c) + pr_th * Dth(p, c) -
                         rho[p] * data.f(p, c);
    }
    double adv = 0.0;
    for (int k = 0; k < d; ++k) adv += v(p, k) * Dth(p, k);
    const Eigen::MatrixXd S = stress_tensor(grad, pp.mu, pp.lambda);
    r.energy[p] = rho[p] * e_th * adv + th[p] * pr_th * divv[p] - (S.array() * grad.array()).sum();
  }
  // Heat conduction with the Robin relation kappa dtheta/dn + L theta = g + L (T0 + T1).
  BoundaryField q = data.g;
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const double L = pp.L(grid.face(fid).patch());
    q.faces[fid].array() += L * (pp.T0 + data.T1.faces[fid].array());
  }
  ScalarEllipticOp heat{0.0, pp.kappa, 0.0, {pp.L(Patch::Inflow), pp.L(Patch::Outflow), pp.L(Patch::Wall)}};
  r.energy += apply_scalar_op(grid, heat, th, &q);

  VectorField axial = v;
  axial.col(0).array() -= 1.0;
  r.continuity = marching_operator(grid, axial, rho) + (rho.array() * divv.array()).matrix();
  r.continuity.tail(grid.slice_size()).setZero();

  r.norms["momentum"] = scaled_L2(grid, r.momentum);
  r.norms["continuity"] = scaled_L2(grid, r.continuity);
  r.norms["energy"] = scaled_L2(grid, r.energy);

  // Boundary conditions, evaluated with one-sided differences.
  BoundaryField normal = BoundaryField::zeros(grid);
  BoundaryField slip = BoundaryField::zeros(grid);
  BoundaryField heat_bc = BoundaryField::zeros(grid);
  const FaceVectorField t = tangential_stress(grid, v, pp.mu);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    const double L = pp.L(f.patch());
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const auto qi = static_cast<Index>(k);
      const Index p = nodes[k];
      normal.faces[fid][qi] = f.outward_sign() * v(p, f.axis) - data.d.faces[fid][qi];
      double s2 = 0.0;
      for (int c = 0; c < d; ++c) {
        if (c == f.axis) continue;
        s2 += std::pow(t.faces[fid](qi, c) + pp.alpha * v(p, c) - data.b.faces[fid](qi, c), 2);
      }
      slip.faces[fid][qi] = std::sqrt(s2);
      heat_bc.faces[fid][qi] = pp.kappa * f.outward_sign() * Dth(p, f.axis) +
                               L * (th[p] - pp.T0 - data.T1.faces[fid][qi]) - data.g.faces[fid][qi];
    }
  }
  const std::vector<Patch> all{Patch::Inflow, Patch::Outflow, Patch::Wall};
  r.norms["bc_normal_velocity"] = scaled_boundary_L2(grid, normal, all);
  r.norms["bc_slip"] = scaled_boundary_L2(grid, slip, all);
  BoundaryField inflow = BoundaryField::zeros(grid);
  const int fin = Grid::face_id({0, 0});
  const auto& in_nodes = grid.face_nodes(fin);
  for (std::size_t k = 0; k < in_nodes.size(); ++k)
    inflow.faces[fin][static_cast<Index>(k)] = rho[in_nodes[k]] - data.rho_in[static_cast<Index>(k)];
  r.norms["bc_inflow_density"] = scaled_boundary_L2(grid, inflow, {Patch::Inflow});
  r.norms["bc_heat_flux"] = scaled_boundary_L2(grid, heat_bc, {Patch::Inflow, Patch::Outflow});
  r.norms["bc_wall_temperature"] = scaled_boundary_L2(grid, heat_bc, {Patch::Wall});
  return r;
}

// ---------------------------------------------------------------------------

double weak_momentum_residual(const LinearSystem& sys, const LinearProblemData& data,
                              const FlowState& sol, const VectorField& v) {
  const Grid& g = sys.grid();
  const auto& pp = sys.params();
  const auto& lin = sys.constants();
  const int d = g.dim();
  std::vector<VectorField> Du(d), Dv(d);
  for (int c = 0; c < d; ++c) {
    Du[c] = gradient(g, sol.u.col(c));
    Dv[c] = gradient(g, v.col(c));
  }
  const ScalarField divv = divergence(g, v);
  double acc = 0.0;
  Eigen::MatrixXd gu(d, d), gv(d, d);
  for (Index p = 0; p < g.size(); ++p) {
    for (int c = 0; c < d; ++c)
      for (int k = 0; k < d; ++k) {
        gu(c, k) = Du[c](p, k);
        gv(c, k) = Dv[c](p, k);
      }
    const Eigen::MatrixXd S = stress_tensor(gu, pp.mu, pp.lambda);
    double local = (S.array() * gv.array()).sum() - (lin.p1 * sol.sigma[p] + lin.p2 * sol.eta[p]) * divv[p];
    for (int c = 0; c < d; ++c) local += (Du[c](p, 0) - data.F(p, c)) * v(p, c);
    acc += g.weight(p) * local;
  }
  for (int fid = 0; fid < g.face_count(); ++fid) {
    const Face f = g.face(fid);
    const auto& nodes = g.face_nodes(fid);
    const auto& w = g.face_weights(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q)
      for (int c = 0; c < d; ++c) {
        if (c == f.axis) continue;
        const auto qi = static_cast<Index>(q);
        acc += w[qi] * (pp.alpha * sol.u(nodes[q], c) - data.B.faces[fid](qi, c)) * v(nodes[q], c);
      }
  }
  return acc;
}

double weak_energy_residual(const LinearSystem& sys, const LinearProblemData& data,
                            const FlowState& sol, const ScalarField& z) {
  const Grid& g = sys.grid();
  const auto& pp = sys.params();
  const auto& lin = sys.constants();
  const VectorField De = gradient(g, sol.eta);
  const VectorField Dz = gradient(g, z);
  const ScalarField divu = divergence(g, sol.u);
  double acc = 0.0;
  for (Index p = 0; p < g.size(); ++p) {
    double local = (lin.r0 * De(p, 0) + lin.r1 * divu[p] - data.H[p]) * z[p];
    for (int k = 0; k < g.dim(); ++k) local += pp.kappa * De(p, k) * Dz(p, k);
    acc += g.weight(p) * local;
  }
  for (int fid = 0; fid < g.face_count(); ++fid) {
    const double L = pp.L(g.face(fid).patch());
    const auto& nodes = g.face_nodes(fid);
    const auto& w = g.face_weights(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q)
      acc += w[static_cast<Index>(q)] * L * sol.eta[nodes[q]] * z[nodes[q]];
  }
  return acc;
}

GenericResidual generic_strong_residual(const LinearSystem& sys, const LinearProblemData& data,
                                        const FlowState& sol) {
  const Grid& g = sys.grid();
  const auto& pp = sys.params();
  const auto& lin = sys.constants();
  const int d = g.dim();
  const ScalarField divu = divergence(g, sol.u);
  const VectorField Ddiv = gradient(g, divu);
  const VectorField Ds = gradient(g, sol.sigma);
  const VectorField De = gradient(g, sol.eta);
  VectorField rm = VectorField::Zero(g.size(), d);
  for (int c = 0; c < d; ++c) {
    const ScalarField lap = laplacian(g, sol.u.col(c));
    const ScalarField d1 = derivative(g, sol.u.col(c), 0);
    for (Index p = 0; p < g.size(); ++p) {
      if (is_normal_row(g, p, c)) continue;
      rm(p, c) = d1[p] - pp.mu * lap[p] - pp.grad_div() * Ddiv(p, c) + lin.p1 * Ds(p, c) +
                 lin.p2 * De(p, c) - data.F(p, c);
    }
  }
  const FaceVectorField t = tangential_stress(g, sol.u, pp.mu);
  BoundaryField slip = BoundaryField::zeros(g);
  BoundaryField robin = BoundaryField::zeros(g);
  for (int fid = 0; fid < g.face_count(); ++fid) {
    const Face f = g.face(fid);
    const double L = pp.L(f.patch());
    const auto& nodes = g.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const auto qi = static_cast<Index>(q);
      double s2 = 0.0;
      for (int c = 0; c < d; ++c)
        if (c != f.axis)
          s2 += std::pow(t.faces[fid](qi, c) + pp.alpha * sol.u(nodes[q], c) - data.B.faces[fid](qi, c), 2);
      slip.faces[fid][qi] = std::sqrt(s2);
      robin.faces[fid][qi] = pp.kappa * f.outward_sign() * De(nodes[q], f.axis) + L * sol.eta[nodes[q]];
    }
  }
  const ScalarField re = lin.r0 * De.col(0) - pp.kappa * laplacian(g, sol.eta) + lin.r1 * divu - data.H;
  GenericResidual r;
  r.momentum = norm_Lp(g, rm, 2.0) + boundary_Lp(g, slip, 2.0);
  r.energy = norm_Lp(g, re, 2.0) + boundary_Lp(g, robin, 2.0);
  return r;
}

}  // namespace nsf
