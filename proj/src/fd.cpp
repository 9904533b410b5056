#include "nsf/fd.hpp"

#include <stdexcept>

namespace nsf {

Stencil first_derivative_stencil(int i, int n_nodes, double h) {
  Stencil s;
  if (n_nodes < 3) throw std::invalid_argument("first derivative needs three nodes");
  const double inv = 1.0 / (2.0 * h);
  if (i == 0) {
    s.count = 3;
    s.offset = {0, 1, 2, 0};
    s.coeff = {-3.0 * inv, 4.0 * inv, -1.0 * inv, 0.0};
  } else if (i == n_nodes - 1) {
    s.count = 3;
    s.offset = {0, -1, -2, 0};
    s.coeff = {3.0 * inv, -4.0 * inv, 1.0 * inv, 0.0};
  } else {
    s.count = 2;
    s.offset = {-1, 1, 0, 0};
    s.coeff = {-inv, inv, 0.0, 0.0};
  }
  return s;
}

Stencil second_derivative_stencil(int i, int n_nodes, double h) {
  Stencil s;
  if (n_nodes < 4) throw std::invalid_argument("second derivative needs four nodes");
  const double inv = 1.0 / (h * h);
  if (i == 0 || i == n_nodes - 1) {
    const int dir = i == 0 ? 1 : -1;
    s.count = 4;
    s.offset = {0, dir, 2 * dir, 3 * dir};
    s.coeff = {2.0 * inv, -5.0 * inv, 4.0 * inv, -1.0 * inv};
  } else {
    s.count = 3;
    s.offset = {-1, 0, 1, 0};
    s.coeff = {inv, -2.0 * inv, inv, 0.0};
  }
  return s;
}

namespace {

template <class MakeStencil>
ScalarField apply_axis(const Grid& grid, const ScalarField& f, int axis, MakeStencil&& make) {
  ScalarField out(grid.size());
  const Index stride = grid.stride(axis);
  const int n = grid.nodes(axis);
  const double h = grid.spacing(axis);
  for (Index p = 0; p < grid.size(); ++p) {
    const int i = grid.multi_index(p)[axis];
    const Stencil s = make(i, n, h);
    double acc = 0.0;
    for (int k = 0; k < s.count; ++k) acc += s.coeff[k] * f[p + s.offset[k] * stride];
    out[p] = acc;
  }
  return out;
}

}  // namespace

ScalarField derivative(const Grid& grid, const ScalarField& f, int axis) {
  return apply_axis(grid, f, axis, first_derivative_stencil);
}

ScalarField second_derivative(const Grid& grid, const ScalarField& f, int axis) {
  return apply_axis(grid, f, axis, second_derivative_stencil);
}

ScalarField mixed_derivative(const Grid& grid, const ScalarField& f, int a, int b) {
  if (a == b) return second_derivative(grid, f, a);
  return derivative(grid, derivative(grid, f, b), a);
}

VectorField gradient(const Grid& grid, const ScalarField& f) {
  VectorField g(grid.size(), grid.dim());
  for (int k = 0; k < grid.dim(); ++k) g.col(k) = derivative(grid, f, k);
  return g;
}

ScalarField divergence(const Grid& grid, const VectorField& u) {
  ScalarField d = ScalarField::Zero(grid.size());
  for (int k = 0; k < grid.dim(); ++k) d += derivative(grid, u.col(k), k);
  return d;
}

ScalarField laplacian(const Grid& grid, const ScalarField& f) {
  ScalarField l = ScalarField::Zero(grid.size());
  for (int k = 0; k < grid.dim(); ++k) l += second_derivative(grid, f, k);
  return l;
}

SparseMatrix derivative_matrix(const Grid& grid, int axis) {
  std::vector<Triplet> t;
  const Index stride = grid.stride(axis);
  for (Index p = 0; p < grid.size(); ++p) {
    const int i = grid.multi_index(p)[axis];
    const Stencil s = first_derivative_stencil(i, grid.nodes(axis), grid.spacing(axis));
    for (int k = 0; k < s.count; ++k) t.emplace_back(p, p + s.offset[k] * stride, s.coeff[k]);
  }
  SparseMatrix m(grid.size(), grid.size());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix gradient_matrix(const Grid& grid) {
  const Index n = grid.size();
  std::vector<Triplet> t;
  for (int c = 0; c < grid.dim(); ++c) {
    const SparseMatrix d = derivative_matrix(grid, c);
    for (Index r = 0; r < d.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(d, r); it; ++it)
        t.emplace_back(c * n + r, it.col(), it.value());
  }
  SparseMatrix g(grid.dim() * n, n);
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

double inner(const Grid& grid, const ScalarField& a, const ScalarField& b) {
  return (grid.weights().array() * a.array() * b.array()).sum();
}

double inner(const Grid& grid, const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (Index c = 0; c < a.cols(); ++c) s += inner(grid, ScalarField(a.col(c)), ScalarField(b.col(c)));
  return s;
}

double mean(const Grid& grid, const ScalarField& f) {
  return grid.weights().dot(f) / grid.domain().volume();
}

}  // namespace nsf
