#pragma once

#include "nsf/grid.hpp"

#include <Eigen/SparseCore>

#include <array>

namespace nsf {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// One-dimensional difference stencil: offsets relative to the node and weights.
struct Stencil {
  int count = 0;
  std::array<int, 4> offset{};
  std::array<double, 4> coeff{};
};

/// Second-order first derivative: centered inside, one-sided at the ends.
Stencil first_derivative_stencil(int i, int n_nodes, double h);
/// Second-order second derivative: centered inside, four-point one-sided at the ends.
Stencil second_derivative_stencil(int i, int n_nodes, double h);

ScalarField derivative(const Grid& grid, const ScalarField& f, int axis);
ScalarField second_derivative(const Grid& grid, const ScalarField& f, int axis);
ScalarField mixed_derivative(const Grid& grid, const ScalarField& f, int a, int b);

VectorField gradient(const Grid& grid, const ScalarField& f);
ScalarField divergence(const Grid& grid, const VectorField& u);
ScalarField laplacian(const Grid& grid, const ScalarField& f);

/// Matrix of derivative(., axis) acting on nodal values.
SparseMatrix derivative_matrix(const Grid& grid, int axis);
/// Stacked gradient: rows are component-major (c * N + node).
SparseMatrix gradient_matrix(const Grid& grid);

/// Weighted inner products with the trapezoid weights.
double inner(const Grid& grid, const ScalarField& a, const ScalarField& b);
double inner(const Grid& grid, const VectorField& a, const VectorField& b);
double mean(const Grid& grid, const ScalarField& f);

}  // namespace nsf
