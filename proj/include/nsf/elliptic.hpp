#pragma once

#include "nsf/fd.hpp"
#include "nsf/grid.hpp"

#include <Eigen/SparseLU>

#include <array>
#include <memory>

namespace nsf {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Sparse LU factorization of an assembled operator, reusable across solves.
class Factorization {
 public:
  explicit Factorization(const ColMatrix& a);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Index size() const { return n_; }

 private:
  Index n_;
  std::shared_ptr<Eigen::SparseLU<ColMatrix>> lu_;
};

// ---------------------------------------------------------------------------
// Scalar operators: convection * d/dx1 - diffusion * Lap + reaction, with ghost
// values from diffusion * du/dn + robin(patch) * u = q on each face.

struct ScalarEllipticOp {
  double convection = 0.0;
  double diffusion = 1.0;
  double reaction = 0.0;
  std::array<double, 3> robin{0.0, 0.0, 0.0};  // indexed by Patch
};

/// Applies the operator to u with boundary datum q (zero datum when q is null).
ScalarField apply_scalar_op(const Grid& grid, const ScalarEllipticOp& op, const ScalarField& u,
                            const BoundaryField* q = nullptr);

/// Assembled matrix of the operator with zero datum.
ColMatrix assemble_scalar_op(const Grid& grid, const ScalarEllipticOp& op);

// ---------------------------------------------------------------------------
// Neumann problem: Lap u = f, du/dn = flux, mean(u) = C0.

struct NeumannProblem {
  ScalarField f;
  BoundaryField flux;
  double mean = 0.0;
  bool project = true;  // project f onto compatible data
};

struct NeumannResult {
  ScalarField u;
  double compatibility_defect = 0.0;  // int f - int flux before projection
  ScalarField f_effective;            // right-hand side actually solved
};

class NeumannSolver {
 public:
  explicit NeumannSolver(const Grid& grid);
  NeumannResult solve(const NeumannProblem& problem) const;

 private:
  const Grid* grid_;
  Factorization lu_;
};

ScalarField solve_neumann(const NeumannProblem& problem, const Grid& grid);
/// Ghost-based discrete Laplacian with Neumann datum (zero when null).
ScalarField neumann_laplacian(const Grid& grid, const ScalarField& u, const BoundaryField* flux);

// ---------------------------------------------------------------------------
// Robin temperature problem: r0 d/dx1 eta - kappa Lap eta = rhs,
// kappa d eta/dn + L eta = q.

struct RobinParams {
  double r0 = 1.0;
  double kappa = 1.0;
  std::array<double, 3> L{0.0, 0.0, 0.0};  // indexed by Patch
};

ScalarEllipticOp robin_op(const RobinParams& rp);

class RobinSolver {
 public:
  RobinSolver(const Grid& grid, const RobinParams& rp);
  ScalarField solve(const ScalarField& rhs, const BoundaryField* q = nullptr) const;
  const RobinParams& params() const { return rp_; }

 private:
  const Grid* grid_;
  RobinParams rp_;
  Factorization lu_;
};

/// Solves r0 d/dx1 eta - kappa Lap eta = rhs - coupling with homogeneous Robin data.
ScalarField solve_robin_temperature(const ScalarField& rhs, double r0, const ScalarField& coupling,
                                    double kappa, const std::array<double, 3>& L, const Grid& grid);

// ---------------------------------------------------------------------------
// Lame system with slip: convection d/dx1 u - mu Lap u - grad_div grad div u = F,
// n.u = 0, mu (du_tau/dn + d(u.n)/dtau) + alpha u_tau = B.

struct LameOperator {
  double mu = 1.0;
  double grad_div = 1.0 / 3.0;
  std::array<double, 3> alpha{1.0, 1.0, 1.0};  // indexed by Patch
  double convection = 0.0;
};

struct LameProblem {
  VectorField F;
  FaceVectorField B;  // tangential columns are used, normal column ignored
};

class LameSolver {
 public:
  LameSolver(const Grid& grid, const LameOperator& op);
  VectorField solve(const VectorField& F, const FaceVectorField& B) const;
  const LameOperator& op() const { return op_; }

 private:
  const Grid* grid_;
  LameOperator op_;
  Factorization lu_;
};

VectorField solve_lame_slip(const LameProblem& problem, const LameOperator& op, const Grid& grid);

/// True for rows fixed by n.u = 0 (component c on a face normal to axis c).
bool is_normal_row(const Grid& grid, Index p, int c);

/// Residual form of the Lame operator: operator rows, with u_c itself on normal rows.
VectorField apply_lame(const Grid& grid, const LameOperator& op, const VectorField& u,
                       const FaceVectorField& B);

/// Discrete div S(grad w) with tangential boundary stress t (ghost-based at faces).
VectorField stress_divergence(const Grid& grid, const VectorField& w, const FaceVectorField& t,
                              double mu, double grad_div);

/// Tangential stress (S n).tau of w from one-sided differences on every face.
FaceVectorField tangential_stress(const Grid& grid, const VectorField& w, double mu);

/// Restriction of a nodal vector field to the faces.
FaceVectorField face_trace(const Grid& grid, const VectorField& w);

// ---------------------------------------------------------------------------

struct HelmholtzParts {
  ScalarField phi;       // mean zero
  VectorField grad_phi;  // discrete gradient of phi
  VectorField A;         // u - grad_phi
};

/// Weighted least-squares projection onto discrete gradients.
class HelmholtzProjector {
 public:
  /// With skip_normal_rows, normal components on the faces carry no weight in the fit.
  explicit HelmholtzProjector(const Grid& grid, bool skip_normal_rows = false);
  HelmholtzParts decompose(const VectorField& u) const;
  /// Potential whose gradient best fits r (mean fixed to `mean_value`).
  ScalarField fit_potential(const VectorField& r, double mean_value) const;

 private:
  const Grid* grid_;
  SparseMatrix G_;
  Eigen::VectorXd w_;
  Factorization lu_;
};

HelmholtzParts helmholtz_decompose(const VectorField& u, const Grid& grid);

/// Curl: one column in d = 2, three in d = 3.
VectorField vorticity(const VectorField& u, const Grid& grid);

/// d = 2 wall relation omega = s (alpha u_tau - B) / mu evaluated on the lateral faces.
BoundaryField vorticity_wall_residual(const Grid& grid, const VectorField& u,
                                      const FaceVectorField& B, double mu, double alpha);

/// Riesz lift of F: (-Lap + I) r = F with zero Neumann data; returns ||r||_{W^1_2}.
double riesz_dual_norm(const Grid& grid, const VectorField& F);

}  // namespace nsf
