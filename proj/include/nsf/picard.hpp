#pragma once

#include "nsf/background.hpp"
#include "nsf/constitutive.hpp"
#include "nsf/data.hpp"
#include "nsf/elliptic.hpp"
#include "nsf/grid.hpp"
#include "nsf/norms.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsf {

/// Perturbation (u, sigma, eta) of the background flow and lift.
struct FlowState {
  VectorField u;
  ScalarField sigma;
  ScalarField eta;

  static FlowState zero(const Grid& grid);
};

/// Data of the linearized system.
struct LinearProblemData {
  VectorField F;
  ScalarField G;
  ScalarField H;
  FaceVectorField B;
  Eigen::VectorXd sigma_in;  // inflow face order
  VectorField U;             // transport velocity perturbation

  static LinearProblemData zero(const Grid& grid);
};

class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StagnationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorized operators of the linearized system.
class LinearSystem {
 public:
  LinearSystem(const Grid& grid, const PhysicalParams& pp, const LinearizationConstants& lin);

  const Grid& grid() const { return *grid_; }
  const PhysicalParams& params() const { return pp_; }
  const LinearizationConstants& constants() const { return lin_; }
  const LameSolver& lame() const { return *lame_; }
  const RobinSolver& robin() const { return *robin_; }
  LameOperator lame_operator() const;
  RobinParams robin_params() const;

 private:
  const Grid* grid_;
  PhysicalParams pp_;
  LinearizationConstants lin_;
  std::shared_ptr<LameSolver> lame_;
  std::shared_ptr<RobinSolver> robin_;
};

/// Weak norm ||u||_{W^1_2} + ||sigma||_{L_inf(L_2)} + ||eta||_{W^1_2}.
double weak_norm(const Grid& grid, const FlowState& s);
double weak_distance(const Grid& grid, const FlowState& a, const FlowState& b);
/// A = ||u||_{W^2_p} + ||sigma||_{W^1_p} + ||eta||_{W^2_p}.
double strong_norm(const Grid& grid, const FlowState& s, double p);

struct LinearStepOptions {
  double tol = 1e-11;
  int max_sweeps = 200;
  int stagnation_window = 20;
  double stagnation_ratio = 0.999;
};

struct LinearResidual {
  VectorField momentum;    // u_c itself on normal rows
  ScalarField continuity;  // zero on the outflow slice
  ScalarField energy;
  Eigen::VectorXd inflow;  // sigma - sigma_in

  double max_abs() const;
};

struct LinearStepReport {
  int sweeps = 0;
  bool converged = false;
  double last_increment = std::numeric_limits<double>::infinity();
  std::vector<double> increments;
  double residual_momentum = 0, residual_continuity = 0, residual_energy = 0;
};

struct LinearStepResult {
  FlowState state;
  LinearStepReport report;
};

/// Strong residual of the linearized system at a state.
LinearResidual linear_residual(const LinearSystem& sys, const LinearProblemData& data,
                               const FlowState& s);

/// Block Gauss-Seidel: Lame solve, transport march, Robin solve.
LinearStepResult solve_linear_step(const LinearProblemData& data, const LinearSystem& sys,
                                   const FlowState& initial, const LinearStepOptions& opts = {});

/// Everything fixed for one nonlinear problem on one grid.
class ProblemContext {
 public:
  ProblemContext(const Grid& grid, const PhysicalParams& pp, const ConstitutiveLaws& laws,
                 const ProblemData& data, double p = kDefaultP);

  const Grid& grid() const { return *grid_; }
  const PhysicalParams& params() const { return pp_; }
  const ConstitutiveLaws& laws() const { return laws_; }
  const ProblemData& data() const { return data_; }
  const BackgroundState& background() const { return bg_; }
  const LiftField& lift() const { return lift_; }
  const LinearSystem& system() const { return *sys_; }
  double D0() const { return D0_; }
  double p() const { return p_; }

  // Quantities of the background and lift reused by every assembly.
  const ScalarField& theta_bar() const { return theta_bar_; }
  const FaceVectorField& lift_stress() const { return lift_stress_; }
  const VectorField& lift_stress_divergence() const { return lift_div_stress_; }

 private:
  const Grid* grid_;
  PhysicalParams pp_;
  ConstitutiveLaws laws_;
  ProblemData data_;
  BackgroundState bg_;
  LiftField lift_;
  std::shared_ptr<LinearSystem> sys_;
  double D0_ = 0.0;
  double p_ = kDefaultP;
  ScalarField theta_bar_;
  FaceVectorField lift_stress_;
  VectorField lift_div_stress_;
};

/// Right-hand sides of the linearized system at a state.
LinearProblemData assemble_FGH(const FlowState& state, const ProblemContext& ctx);

struct PicardOptions {
  double tol = 1e-10;
  int max_iter = 50;
  LinearStepOptions inner;
  double rho_min = 0.1;
};

struct IterationRecord {
  int step = 0;
  double A = 0;
  double delta = 0;
  /// delta_n / delta_{n-1}, i.e. the ratio q_{n-1}; NaN when undefined.
  double q = std::numeric_limits<double>::quiet_NaN();
  /// A_n / (A_{n-1}^2 + A_{n-1}^3 + D0).
  double recursion_ratio = std::numeric_limits<double>::quiet_NaN();
  int inner_sweeps = 0;
  double inner_increment = 0;
  double residual_momentum = 0, residual_continuity = 0, residual_energy = 0;
};

struct IterationReport {
  std::vector<IterationRecord> steps;
  double D0 = 0;
  bool converged = false;
  bool diverged = false;
  std::string failure;
  std::vector<std::string> warnings;
  double recursion_C = 0;  // max recursion ratio

  double max_q(int from_index = 2) const;  // over q_n with n >= from_index
};

struct PicardResult {
  FlowState state;
  IterationReport report;
};

using StepCallback = std::function<void(const IterationRecord&)>;

PicardResult picard_iterate(const FlowState& initial, const ProblemContext& ctx,
                            const PicardOptions& opts = {}, const StepCallback& on_step = {});

struct PhysicalState {
  VectorField v;
  ScalarField rho;
  ScalarField theta;
};

PhysicalState reconstruct_physical(const FlowState& s, const ProblemContext& ctx);
FlowState perturbation_of(const PhysicalState& ph, const ProblemContext& ctx);

/// Weak distance between the fixed points reached from two starts.
double uniqueness_probe(const ProblemContext& ctx, const FlowState& start_a,
                        const FlowState& start_b, const PicardOptions& opts = {});

/// Residual of the effective damped transport identity at a linear-step solution.
struct TransIdentity {
  ScalarField K;
  ScalarField residual;
  double l2 = 0;
};

TransIdentity trans_identity(const LinearSystem& sys, const LinearProblemData& data,
                             const FlowState& sol, const HelmholtzProjector& helm);

}  // namespace nsf
