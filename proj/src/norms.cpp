#include "nsf/norms.hpp"

#include "nsf/fd.hpp"

#include <cmath>

namespace nsf {

namespace {

double sum_pow(const Eigen::VectorXd& w, const Eigen::VectorXd& f, double p) {
  return (w.array() * f.array().abs().pow(p)).sum();
}

double sum_pow(const Grid& grid, const ScalarField& f, double p) {
  return sum_pow(grid.weights(), f, p);
}

double first_order_sum(const Grid& grid, const ScalarField& f, double p) {
  double s = sum_pow(grid, f, p);
  for (int k = 0; k < grid.dim(); ++k) s += sum_pow(grid, derivative(grid, f, k), p);
  return s;
}

double second_order_sum(const Grid& grid, const ScalarField& f, double p) {
  double s = first_order_sum(grid, f, p);
  for (int a = 0; a < grid.dim(); ++a)
    for (int b = a; b < grid.dim(); ++b) s += sum_pow(grid, mixed_derivative(grid, f, a, b), p);
  return s;
}

}  // namespace

double norm_Lp(const Grid& grid, const ScalarField& f, double p) {
  return std::pow(sum_pow(grid, f, p), 1.0 / p);
}

double norm_Lp(const Grid& grid, const VectorField& u, double p) {
  double s = 0.0;
  for (Index c = 0; c < u.cols(); ++c) s += sum_pow(grid, u.col(c), p);
  return std::pow(s, 1.0 / p);
}

double norm_Linf(const ScalarField& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

double norm_W1p(const Grid& grid, const ScalarField& f, double p) {
  return std::pow(first_order_sum(grid, f, p), 1.0 / p);
}

double norm_W1p(const Grid& grid, const VectorField& u, double p) {
  double s = 0.0;
  for (Index c = 0; c < u.cols(); ++c) s += first_order_sum(grid, u.col(c), p);
  return std::pow(s, 1.0 / p);
}

double norm_W2p(const Grid& grid, const ScalarField& f, double p) {
  return std::pow(second_order_sum(grid, f, p), 1.0 / p);
}

double norm_W2p(const Grid& grid, const VectorField& u, double p) {
  double s = 0.0;
  for (Index c = 0; c < u.cols(); ++c) s += second_order_sum(grid, u.col(c), p);
  return std::pow(s, 1.0 / p);
}

Eigen::VectorXd slice_L2_norms(const Grid& grid, const ScalarField& f) {
  const Index m = grid.slice_size();
  Eigen::VectorXd out(grid.nodes(0));
  for (int i = 0; i < grid.nodes(0); ++i) {
    const auto slice = f.segment(i * m, m);
    out[i] = std::sqrt((grid.slice_weights().array() * slice.array().square()).sum());
  }
  return out;
}

double sup_slice_L2_norm(const Grid& grid, const ScalarField& f) {
  return slice_L2_norms(grid, f).maxCoeff();
}

std::vector<Eigen::VectorXd> face_tangential_derivatives(const Grid& grid, int face,
                                                         const Eigen::VectorXd& values) {
  const Face fc = grid.face(face);
  std::vector<int> axes;
  for (int k = 0; k < grid.dim(); ++k)
    if (k != fc.axis) axes.push_back(k);
  // Face lattice is row-major over the tangential axes in ascending order.
  std::vector<Index> local_stride(axes.size(), 1);
  for (int j = static_cast<int>(axes.size()) - 2; j >= 0; --j)
    local_stride[j] = local_stride[j + 1] * grid.nodes(axes[j + 1]);

  std::vector<Eigen::VectorXd> out;
  const auto& nodes = grid.face_nodes(face);
  for (std::size_t j = 0; j < axes.size(); ++j) {
    const int k = axes[j];
    Eigen::VectorXd d(values.size());
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const int i = grid.multi_index(nodes[q])[k];
      const Stencil s = first_derivative_stencil(i, grid.nodes(k), grid.spacing(k));
      double acc = 0.0;
      for (int m = 0; m < s.count; ++m)
        acc += s.coeff[m] * values[static_cast<Index>(q) + s.offset[m] * local_stride[j]];
      d[static_cast<Index>(q)] = acc;
    }
    out.push_back(d);
  }
  return out;
}

namespace {

double boundary_sum(const Grid& grid, const BoundaryField& f, double p, const Patch* patch,
                    bool with_tangential) {
  double s = 0.0;
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    if (patch && grid.face(fid).patch() != *patch) continue;
    s += sum_pow(grid.face_weights(fid), f.faces[fid], p);
    if (with_tangential)
      for (const auto& d : face_tangential_derivatives(grid, fid, f.faces[fid]))
        s += sum_pow(grid.face_weights(fid), d, p);
  }
  return s;
}

}  // namespace

double boundary_Lp(const Grid& grid, const BoundaryField& f, double p) {
  return std::pow(boundary_sum(grid, f, p, nullptr, false), 1.0 / p);
}

double boundary_Lp(const Grid& grid, const BoundaryField& f, double p, Patch patch) {
  return std::pow(boundary_sum(grid, f, p, &patch, false), 1.0 / p);
}

double trace_norm(const Grid& grid, const BoundaryField& f, double p) {
  double tangential = 0.0;
  for (int fid = 0; fid < grid.face_count(); ++fid)
    for (const auto& d : face_tangential_derivatives(grid, fid, f.faces[fid]))
      tangential += sum_pow(grid.face_weights(fid), d, p);
  return boundary_Lp(grid, f, p) + std::pow(tangential, 1.0 / p);
}

double trace_norm(const Grid& grid, const BoundaryField& f, double p, Patch patch) {
  double tangential = 0.0;
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    if (grid.face(fid).patch() != patch) continue;
    for (const auto& d : face_tangential_derivatives(grid, fid, f.faces[fid]))
      tangential += sum_pow(grid.face_weights(fid), d, p);
  }
  return boundary_Lp(grid, f, p, patch) + std::pow(tangential, 1.0 / p);
}

double inflow_W1p(const Grid& grid, const Eigen::VectorXd& inflow_values, double p) {
  const int fid = Grid::face_id({0, 0});
  double s = sum_pow(grid.face_weights(fid), inflow_values, p);
  for (const auto& d : face_tangential_derivatives(grid, fid, inflow_values))
    s += sum_pow(grid.face_weights(fid), d, p);
  return std::pow(s, 1.0 / p);
}

double inflow_L2(const Grid& grid, const Eigen::VectorXd& inflow_values) {
  const int fid = Grid::face_id({0, 0});
  return std::sqrt(sum_pow(grid.face_weights(fid), inflow_values, 2.0));
}

NormReport norm_report(const Grid& grid, const std::string& id, const ScalarField& f, double p) {
  NormReport r;
  r.id = id;
  r.L2 = norm_Lp(grid, f, 2.0);
  r.Lp = norm_Lp(grid, f, p);
  r.W12 = norm_W1p(grid, f, 2.0);
  r.W1p = norm_W1p(grid, f, p);
  r.W2p = norm_W2p(grid, f, p);
  r.Linf = norm_Linf(f);
  r.LinfL2 = sup_slice_L2_norm(grid, f);
  BoundaryField trace = BoundaryField::zeros(grid);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) trace.faces[fid][static_cast<Index>(q)] = f[nodes[q]];
  }
  for (Patch pt : {Patch::Inflow, Patch::Outflow, Patch::Wall})
    r.trace[patch_name(pt)] = boundary_Lp(grid, trace, p, pt);
  return r;
}

}  // namespace nsf
