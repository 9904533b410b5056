#pragma once

#include "nsf/grid.hpp"
#include "nsf/norms.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsf {

/// d/dx1 w + U.grad w + gamma w = h in the channel, w = w_in on the inflow face.
struct TransportProblem {
  VectorField U;         // perturbation of the unit axial flow
  ScalarField h;         // source
  Eigen::VectorXd w_in;  // inflow face values, in inflow face order
  double gamma = 0.0;    // optional damping
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks U.n = 0 on the walls (1e-12) and 1 + U1 >= 1/2.
void validate_transport(const Grid& grid, const VectorField& U);

/// Largest lateral Courant number sum_k |U_k / (1 + U1)| h1 / h_k.
double marching_courant(const Grid& grid, const VectorField& U);

/// First-order upwind march in x1.
ScalarField apply_S_marching(const TransportProblem& problem, const Grid& grid);

/// The difference operator inverted by the march: (1+U1) forward x1 difference plus
/// upwind lateral transport plus gamma w at the next slice. Zero on the outflow slice.
ScalarField marching_operator(const Grid& grid, const VectorField& U, const ScalarField& w,
                              double gamma = 0.0);

using VelocitySampler = std::function<Eigen::Vector3d(const Point&)>;

/// Multilinear interpolation of a nodal field (points clamped to the box).
VelocitySampler multilinear_sampler(const Grid& grid, const VectorField& U);
double multilinear(const Grid& grid, const ScalarField& f, const Point& x);

struct Trajectory {
  std::vector<double> s;
  std::vector<Point> x;
  std::vector<Eigen::Vector3d> velocity;  // (1 + U1, U2, U3) at x
};

/// Trajectories of (1 + U1, U2, U3), one per inflow node in inflow face order.
struct CharacteristicMap {
  double ds = 0.0;
  std::vector<Trajectory> trajectories;
};

/// RK4 tracing until x1 reaches l. ds <= 0 selects min(h) / 2.
CharacteristicMap build_characteristics(const Grid& grid, const VelocitySampler& U, double ds = 0.0);
CharacteristicMap build_characteristics(const TransportProblem& problem, const Grid& grid,
                                        double ds = 0.0);

ScalarField apply_S_characteristic(const TransportProblem& problem, const CharacteristicMap& map,
                                   const Grid& grid);

}  // namespace nsf
