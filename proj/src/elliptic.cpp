#include "nsf/elliptic.hpp"

#include "nsf/norms.hpp"

#include <stdexcept>

namespace nsf {

Factorization::Factorization(const ColMatrix& a)
    : n_(a.rows()), lu_(std::make_shared<Eigen::SparseLU<ColMatrix>>()) {
  lu_->analyzePattern(a);
  lu_->factorize(a);
  if (lu_->info() != Eigen::Success)
    throw std::runtime_error("sparse factorization failed: " + lu_->lastErrorMessage());
}

Eigen::VectorXd Factorization::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = lu_->solve(b);
  if (lu_->info() != Eigen::Success) throw std::runtime_error("sparse solve failed");
  return x;
}

namespace {

int patch_index(const Grid& grid, int fid) { return static_cast<int>(grid.face(fid).patch()); }

// Row visitors. coef(col, value) adds a matrix entry, datum(face, local, value)
// a multiple of the boundary datum.
struct TripletRow {
  std::vector<Triplet>* t;
  Index row;
  void coef(Index col, double v) { t->emplace_back(row, col, v); }
  void datum(int, Index, double) {}
};

struct ApplyRow {
  const ScalarField* u;
  const BoundaryField* q;
  double acc = 0.0;
  void coef(Index col, double v) { acc += v * (*u)[col]; }
  void datum(int f, Index local, double v) {
    if (q) acc += v * q->faces[f][local];
  }
};

template <class V>
void scalar_row(const Grid& g, const ScalarEllipticOp& op, Index p, V& v) {
  const MultiIndex mi = g.multi_index(p);
  if (op.convection != 0.0) {
    const Stencil s = first_derivative_stencil(mi[0], g.nodes(0), g.spacing(0));
    for (int m = 0; m < s.count; ++m) v.coef(p + s.offset[m] * g.stride(0), op.convection * s.coeff[m]);
  }
  if (op.reaction != 0.0) v.coef(p, op.reaction);
  for (int k = 0; k < g.dim(); ++k) {
    const double h = g.spacing(k);
    const Index s = g.stride(k);
    const int i = mi[k];
    const double a = op.diffusion / (h * h);
    if (i > 0 && i < g.nodes(k) - 1) {
      v.coef(p - s, -a);
      v.coef(p, 2.0 * a);
      v.coef(p + s, -a);
    } else {
      const int side = i == 0 ? 0 : 1;
      const Index inner = i == 0 ? p + s : p - s;
      const int fid = Grid::face_id({k, side});
      const double L = op.robin[patch_index(g, fid)];
      v.coef(inner, -2.0 * a);
      v.coef(p, 2.0 * a + 2.0 * L / h);
      v.datum(fid, g.face_local(fid, p), -2.0 / h);
    }
  }
}

}  // namespace

ScalarField apply_scalar_op(const Grid& grid, const ScalarEllipticOp& op, const ScalarField& u,
                            const BoundaryField* q) {
  ScalarField out(grid.size());
  for (Index p = 0; p < grid.size(); ++p) {
    ApplyRow v{&u, q};
    scalar_row(grid, op, p, v);
    out[p] = v.acc;
  }
  return out;
}

ColMatrix assemble_scalar_op(const Grid& grid, const ScalarEllipticOp& op) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(grid.size()) * 8);
  for (Index p = 0; p < grid.size(); ++p) {
    TripletRow v{&t, p};
    scalar_row(grid, op, p, v);
  }
  ColMatrix a(grid.size(), grid.size());
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

namespace {

/// Contribution of the boundary datum alone.
ScalarField datum_part(const Grid& grid, const ScalarEllipticOp& op, const BoundaryField& q) {
  const ScalarField zero = ScalarField::Zero(grid.size());
  return apply_scalar_op(grid, op, zero, &q);
}

/// Appends the mean constraint row/column to a singular operator.
ColMatrix bordered(const Grid& grid, const ColMatrix& a) {
  const Index n = a.rows();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * n));
  for (Index c = 0; c < a.outerSize(); ++c)
    for (ColMatrix::InnerIterator it(a, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index p = 0; p < n; ++p) {
    t.emplace_back(p, n, 1.0);
    t.emplace_back(n, p, grid.weight(p));
  }
  ColMatrix b(n + 1, n + 1);
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

const ScalarEllipticOp kNegLaplacian{0.0, 1.0, 0.0, {0.0, 0.0, 0.0}};

}  // namespace

NeumannSolver::NeumannSolver(const Grid& grid)
    : grid_(&grid), lu_(bordered(grid, assemble_scalar_op(grid, kNegLaplacian))) {}

NeumannResult NeumannSolver::solve(const NeumannProblem& pr) const {
  const Grid& g = *grid_;
  NeumannResult res;
  res.compatibility_defect = g.weights().dot(pr.f) - boundary_integral(g, pr.flux);
  const double vol = g.domain().volume();
  res.f_effective = pr.f;
  if (pr.project) {
    res.f_effective.array() -= res.compatibility_defect / vol;
  } else if (std::abs(res.compatibility_defect) > 1e-10 * (1.0 + pr.f.cwiseAbs().maxCoeff())) {
    throw std::runtime_error("singular Neumann system: incompatible data (defect " +
                             std::to_string(res.compatibility_defect) + ")");
  }
  // -Lap u = -f, ghost datum du/dn = flux.
  Eigen::VectorXd rhs(g.size() + 1);
  rhs.head(g.size()) = -res.f_effective - datum_part(g, kNegLaplacian, pr.flux);
  rhs[g.size()] = pr.mean * vol;
  res.u = lu_.solve(rhs).head(g.size());
  return res;
}

ScalarField solve_neumann(const NeumannProblem& problem, const Grid& grid) {
  return NeumannSolver(grid).solve(problem).u;
}

ScalarField neumann_laplacian(const Grid& grid, const ScalarField& u, const BoundaryField* flux) {
  return -apply_scalar_op(grid, kNegLaplacian, u, flux);
}

ScalarEllipticOp robin_op(const RobinParams& rp) {
  ScalarEllipticOp op;
  op.convection = rp.r0;
  op.diffusion = rp.kappa;
  op.robin = rp.L;
  return op;
}

RobinSolver::RobinSolver(const Grid& grid, const RobinParams& rp)
    : grid_(&grid), rp_(rp), lu_(assemble_scalar_op(grid, robin_op(rp))) {
  if (!(rp.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  for (double L : rp.L)
    if (L < 0.0) throw std::invalid_argument("heat exchange coefficients must be nonnegative");
}

ScalarField RobinSolver::solve(const ScalarField& rhs, const BoundaryField* q) const {
  if (!q) return lu_.solve(rhs);
  return lu_.solve(rhs - datum_part(*grid_, robin_op(rp_), *q));
}

ScalarField solve_robin_temperature(const ScalarField& rhs, double r0, const ScalarField& coupling,
                                    double kappa, const std::array<double, 3>& L, const Grid& grid) {
  return RobinSolver(grid, {r0, kappa, L}).solve(rhs - coupling);
}

// ---------------------------------------------------------------------------

bool is_normal_row(const Grid& grid, Index p, int c) {
  const int i = grid.multi_index(p)[c];
  return i == 0 || i == grid.cells(c);
}

namespace {

struct LameTripletRow {
  std::vector<Triplet>* t;
  Index row;
  Index n;
  void coef(int comp, Index node, double v) { t->emplace_back(row, comp * n + node, v); }
  void datum(int, Index, int, double) {}
};

struct LameApplyRow {
  const VectorField* w;
  const FaceVectorField* q;
  double acc = 0.0;
  void coef(int comp, Index node, double v) { acc += v * (*w)(node, comp); }
  void datum(int f, Index local, int comp, double v) {
    if (q) acc += v * q->faces[f](local, comp);
  }
};

// Row of convection d/dx1 w_c - [mu Lap w_c + grad_div d_c div w] at a node where
// w_c is tangential to every face it lies on. Ghosts come from the slip relation.
template <class V>
void lame_row(const Grid& g, const LameOperator& op, Index p, int c, V& v) {
  const MultiIndex mi = g.multi_index(p);
  const double mu = op.mu;
  const double nu = op.grad_div;
  if (op.convection != 0.0) {
    const Stencil s = first_derivative_stencil(mi[0], g.nodes(0), g.spacing(0));
    for (int m = 0; m < s.count; ++m)
      v.coef(c, p + s.offset[m] * g.stride(0), op.convection * s.coeff[m]);
  }
  const Stencil dc = first_derivative_stencil(mi[c], g.nodes(c), g.spacing(c));
  const Index sc = g.stride(c);
  for (int k = 0; k < g.dim(); ++k) {
    const double h = g.spacing(k);
    const Index s = g.stride(k);
    const int i = mi[k];
    const double a = mu / (h * h);
    if (i > 0 && i < g.nodes(k) - 1) {
      v.coef(c, p - s, -a);
      v.coef(c, p, 2.0 * a);
      v.coef(c, p + s, -a);
    } else {
      const int side = i == 0 ? 0 : 1;
      const Index inner = i == 0 ? p + s : p - s;
      const int fid = Grid::face_id({k, side});
      const double alpha = op.alpha[patch_index(g, fid)];
      const double sgn = side == 0 ? -1.0 : 1.0;
      v.coef(c, inner, -2.0 * a);
      v.coef(c, p, 2.0 * a + 2.0 * alpha / h);
      v.datum(fid, g.face_local(fid, p), c, -2.0 / h);
      for (int m = 0; m < dc.count; ++m)
        v.coef(k, p + dc.offset[m] * sc, 2.0 * mu * sgn / h * dc.coeff[m]);
    }
  }
  if (nu != 0.0) {
    const double hc = g.spacing(c);
    v.coef(c, p - sc, -nu / (hc * hc));
    v.coef(c, p, 2.0 * nu / (hc * hc));
    v.coef(c, p + sc, -nu / (hc * hc));
    for (int k = 0; k < g.dim(); ++k) {
      if (k == c) continue;
      for (int m = 0; m < dc.count; ++m) {
        const Index q = p + dc.offset[m] * sc;
        const Stencil dk = first_derivative_stencil(g.multi_index(q)[k], g.nodes(k), g.spacing(k));
        for (int j = 0; j < dk.count; ++j)
          v.coef(k, q + dk.offset[j] * g.stride(k), -nu * dc.coeff[m] * dk.coeff[j]);
      }
    }
  }
}

ColMatrix assemble_lame(const Grid& g, const LameOperator& op) {
  const Index n = g.size();
  const int d = g.dim();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n) * d * 24);
  for (int c = 0; c < d; ++c)
    for (Index p = 0; p < n; ++p) {
      const Index row = c * n + p;
      if (is_normal_row(g, p, c)) {
        t.emplace_back(row, row, 1.0);
        continue;
      }
      LameTripletRow v{&t, row, n};
      lame_row(g, op, p, c, v);
    }
  ColMatrix a(d * n, d * n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

Eigen::VectorXd stack(const VectorField& w) {
  return Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
}

VectorField unstack(const Eigen::VectorXd& x, Index n, int d) {
  return Eigen::Map<const VectorField>(x.data(), n, d);
}

}  // namespace

LameSolver::LameSolver(const Grid& grid, const LameOperator& op)
    : grid_(&grid), op_(op), lu_(assemble_lame(grid, op)) {
  if (!(op.mu > 0.0)) throw std::invalid_argument("mu must be positive");
}

VectorField LameSolver::solve(const VectorField& F, const FaceVectorField& B) const {
  const Grid& g = *grid_;
  const Index n = g.size();
  const int d = g.dim();
  Eigen::VectorXd rhs(n * d);
  const VectorField zero = VectorField::Zero(n, d);
  for (int c = 0; c < d; ++c)
    for (Index p = 0; p < n; ++p) {
      if (is_normal_row(g, p, c)) {
        rhs[c * n + p] = 0.0;
        continue;
      }
      LameApplyRow v{&zero, &B};
      lame_row(g, op_, p, c, v);
      rhs[c * n + p] = F(p, c) - v.acc;
    }
  return unstack(lu_.solve(rhs), n, d);
}

VectorField solve_lame_slip(const LameProblem& problem, const LameOperator& op, const Grid& grid) {
  return LameSolver(grid, op).solve(problem.F, problem.B);
}

VectorField apply_lame(const Grid& grid, const LameOperator& op, const VectorField& u,
                       const FaceVectorField& B) {
  VectorField out(grid.size(), grid.dim());
  for (int c = 0; c < grid.dim(); ++c)
    for (Index p = 0; p < grid.size(); ++p) {
      if (is_normal_row(grid, p, c)) {
        out(p, c) = u(p, c);
        continue;
      }
      LameApplyRow v{&u, &B};
      lame_row(grid, op, p, c, v);
      out(p, c) = v.acc;
    }
  return out;
}

VectorField stress_divergence(const Grid& grid, const VectorField& w, const FaceVectorField& t,
                              double mu, double grad_div) {
  LameOperator op;
  op.mu = mu;
  op.grad_div = grad_div;
  op.alpha = {0.0, 0.0, 0.0};
  op.convection = 0.0;
  const int d = grid.dim();
  VectorField out(grid.size(), d);
  // Generic one-sided evaluation on normal rows, which no equation uses.
  std::vector<std::vector<ScalarField>> dw(d, std::vector<ScalarField>(d));
  for (int c = 0; c < d; ++c)
    for (int k = 0; k < d; ++k) dw[c][k] = derivative(grid, w.col(c), k);
  for (int c = 0; c < d; ++c)
    for (Index p = 0; p < grid.size(); ++p) {
      if (is_normal_row(grid, p, c)) {
        double acc = 0.0;
        const MultiIndex mi = grid.multi_index(p);
        for (int k = 0; k < d; ++k) {
          const Stencil s = second_derivative_stencil(mi[k], grid.nodes(k), grid.spacing(k));
          for (int m = 0; m < s.count; ++m) acc += mu * s.coeff[m] * w(p + s.offset[m] * grid.stride(k), c);
          const Stencil sc = first_derivative_stencil(mi[c], grid.nodes(c), grid.spacing(c));
          for (int m = 0; m < sc.count; ++m)
            acc += grad_div * sc.coeff[m] * dw[k][k][p + sc.offset[m] * grid.stride(c)];
        }
        out(p, c) = acc;
        continue;
      }
      LameApplyRow v{&w, &t};
      lame_row(grid, op, p, c, v);
      out(p, c) = -v.acc;
    }
  return out;
}

FaceVectorField tangential_stress(const Grid& grid, const VectorField& w, double mu) {
  const int d = grid.dim();
  std::vector<std::vector<ScalarField>> dw(d, std::vector<ScalarField>(d));
  for (int c = 0; c < d; ++c)
    for (int k = 0; k < d; ++k) dw[c][k] = derivative(grid, w.col(c), k);
  FaceVectorField t = FaceVectorField::zeros(grid);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q)
      for (int c = 0; c < d; ++c) {
        if (c == f.axis) continue;
        const Index p = nodes[q];
        t.faces[fid](static_cast<Index>(q), c) =
            f.outward_sign() * mu * (dw[c][f.axis][p] + dw[f.axis][c][p]);
      }
  }
  return t;
}

FaceVectorField face_trace(const Grid& grid, const VectorField& w) {
  FaceVectorField t = FaceVectorField::zeros(grid);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) t.faces[fid].row(static_cast<Index>(q)) = w.row(nodes[q]);
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd row_weights(const Grid& grid, bool skip_normal_rows) {
  const int d = grid.dim();
  Eigen::VectorXd w(grid.size() * d);
  for (int c = 0; c < d; ++c) {
    w.segment(c * grid.size(), grid.size()) = grid.weights();
    if (skip_normal_rows)
      for (Index p = 0; p < grid.size(); ++p)
        if (is_normal_row(grid, p, c)) w[c * grid.size() + p] = 0.0;
  }
  return w;
}

ColMatrix helmholtz_normal_matrix(const Grid& grid, const SparseMatrix& G, const Eigen::VectorXd& w) {
  ColMatrix Gc = G;
  ColMatrix N = Gc.transpose() * w.asDiagonal() * Gc;
  return bordered(grid, N);
}

}  // namespace

HelmholtzProjector::HelmholtzProjector(const Grid& grid, bool skip_normal_rows)
    : grid_(&grid),
      G_(gradient_matrix(grid)),
      w_(row_weights(grid, skip_normal_rows)),
      lu_(helmholtz_normal_matrix(grid, G_, w_)) {}

ScalarField HelmholtzProjector::fit_potential(const VectorField& r, double mean_value) const {
  const Grid& g = *grid_;
  const Eigen::VectorXd wr = stack(r).cwiseProduct(w_);
  Eigen::VectorXd rhs(g.size() + 1);
  rhs.head(g.size()) = G_.transpose() * wr;
  rhs[g.size()] = mean_value * g.domain().volume();
  return lu_.solve(rhs).head(g.size());
}

HelmholtzParts HelmholtzProjector::decompose(const VectorField& u) const {
  const Grid& g = *grid_;
  HelmholtzParts parts;
  parts.phi = fit_potential(u, 0.0);
  parts.grad_phi = unstack(G_ * parts.phi, g.size(), g.dim());
  parts.A = u - parts.grad_phi;
  return parts;
}

HelmholtzParts helmholtz_decompose(const VectorField& u, const Grid& grid) {
  return HelmholtzProjector(grid).decompose(u);
}

VectorField vorticity(const VectorField& u, const Grid& grid) {
  if (grid.dim() == 2) {
    VectorField w(grid.size(), 1);
    w.col(0) = derivative(grid, u.col(1), 0) - derivative(grid, u.col(0), 1);
    return w;
  }
  VectorField w(grid.size(), 3);
  w.col(0) = derivative(grid, u.col(2), 1) - derivative(grid, u.col(1), 2);
  w.col(1) = derivative(grid, u.col(0), 2) - derivative(grid, u.col(2), 0);
  w.col(2) = derivative(grid, u.col(1), 0) - derivative(grid, u.col(0), 1);
  return w;
}

BoundaryField vorticity_wall_residual(const Grid& grid, const VectorField& u,
                                      const FaceVectorField& B, double mu, double alpha) {
  if (grid.dim() != 2) throw std::invalid_argument("wall relation is implemented for d = 2");
  const ScalarField w = vorticity(u, grid).col(0);
  BoundaryField r = BoundaryField::zeros(grid);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    const int tau = 1 - f.axis;
    const double s = f.outward_sign();
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const Index p = nodes[q];
      const double ut = u(p, tau);
      const double b = B.faces[fid](static_cast<Index>(q), tau);
      const double expected = f.axis == 1 ? s * (alpha * ut - b) / mu : s * (b - alpha * ut) / mu;
      r.faces[fid][static_cast<Index>(q)] = w[p] - expected;
    }
  }
  return r;
}

double riesz_dual_norm(const Grid& grid, const VectorField& F) {
  const ScalarEllipticOp op{0.0, 1.0, 1.0, {0.0, 0.0, 0.0}};
  const Factorization lu(assemble_scalar_op(grid, op));
  VectorField r(grid.size(), F.cols());
  for (Index c = 0; c < F.cols(); ++c) r.col(c) = lu.solve(F.col(c));
  return norm_W1p(grid, r, 2.0);
}

}  // namespace nsf
