#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace nsf {

using Index = Eigen::Index;
using Point = Eigen::Vector3d;  // trailing coordinates are zero when d = 2
using MultiIndex = std::array<int, 3>;

template <class Scalar>
using ScalarFieldT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
/// Nodal vector field: one row per node, one column per component.
template <class Scalar>
using VectorFieldT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using ScalarField = ScalarFieldT<double>;
using VectorField = VectorFieldT<double>;

enum class Patch { Inflow, Outflow, Wall };

const char* patch_name(Patch p);

/// Face of the box [0,l] x [0,1]^(d-1). side 0 is the lower end of the axis.
struct Face {
  int axis = 0;
  int side = 0;

  double outward_sign() const { return side == 0 ? -1.0 : 1.0; }
  Patch patch() const {
    if (axis != 0) return Patch::Wall;
    return side == 0 ? Patch::Inflow : Patch::Outflow;
  }
};

class ChannelDomain {
 public:
  explicit ChannelDomain(double length, int dim = 2);

  double length() const { return length_; }
  int dim() const { return dim_; }
  double extent(int axis) const { return axis == 0 ? length_ : 1.0; }
  double volume() const { return length_; }
  double patch_measure(Patch p) const;
  double boundary_measure() const;

 private:
  double length_;
  int dim_;
};

class Grid {
 public:
  Grid(const ChannelDomain& domain, const std::vector<int>& cells);

  const ChannelDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int cells(int axis) const { return cells_[axis]; }
  int nodes(int axis) const { return nodes_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  double min_spacing() const;
  int ghost_width() const { return 1; }
  std::vector<int> resolution() const;

  Index size() const { return size_; }
  Index stride(int axis) const { return stride_[axis]; }
  Index index(const MultiIndex& i) const {
    return i[0] * stride_[0] + i[1] * stride_[1] + i[2] * stride_[2];
  }
  MultiIndex multi_index(Index p) const;
  Point coord(Index p) const;

  /// Trapezoid weights; they sum to |Omega| exactly.
  double weight(Index p) const { return weights_[p]; }
  const Eigen::VectorXd& weights() const { return weights_; }

  /// Nodes of one x1-slice are contiguous: [i0 * slice_size, (i0+1) * slice_size).
  Index slice_size() const { return stride_[0]; }
  const Eigen::VectorXd& slice_weights() const { return slice_weights_; }

  int face_count() const { return 2 * dim(); }
  Face face(int f) const { return {f / 2, f % 2}; }
  static int face_id(const Face& f) { return 2 * f.axis + f.side; }
  bool on_face(Index p, const Face& f) const;
  bool on_boundary(Index p) const;
  const std::vector<Index>& face_nodes(int f) const { return face_nodes_[f]; }
  const Eigen::VectorXd& face_weights(int f) const { return face_weights_[f]; }
  /// Position of boundary node p inside face_nodes(f).
  Index face_local(int f, Index p) const;

  /// Patch of a boundary node after the tie-break Inflow > Outflow > Wall.
  std::optional<Patch> patch_of(Index p) const;
  const std::vector<Index>& patch_nodes(Patch p) const {
    return patch_nodes_[static_cast<int>(p)];
  }

 private:
  ChannelDomain domain_;
  MultiIndex cells_{1, 1, 1};
  MultiIndex nodes_{1, 1, 1};
  std::array<double, 3> h_{1.0, 1.0, 1.0};
  std::array<Index, 3> stride_{0, 0, 0};
  Index size_ = 0;
  Eigen::VectorXd weights_;
  Eigen::VectorXd slice_weights_;
  std::vector<std::vector<Index>> face_nodes_;
  std::vector<Eigen::VectorXd> face_weights_;
  std::array<std::vector<Index>, 3> patch_nodes_;
};

/// Validates the resolution (at least 4 cells per axis) and builds the grid.
Grid build_grid(const ChannelDomain& domain, const std::vector<int>& resolution);

/// Per-face nodal values. Edge nodes carry one value for each incident face.
struct BoundaryField {
  std::vector<Eigen::VectorXd> faces;

  static BoundaryField zeros(const Grid& grid);
  BoundaryField& operator+=(const BoundaryField& o);
  BoundaryField& operator*=(double s);
};

/// Per-face vector data (rows: face nodes, columns: components).
struct FaceVectorField {
  std::vector<Eigen::MatrixXd> faces;

  static FaceVectorField zeros(const Grid& grid);
};

/// Values on the tie-broken node set of one patch.
struct BoundaryPatchField {
  Patch patch = Patch::Inflow;
  Eigen::VectorXd values;
};

BoundaryPatchField make_patch_field(const Grid& grid, Patch patch, Eigen::VectorXd values);
BoundaryPatchField restrict_to_patch(const Grid& grid, const BoundaryField& f, Patch patch);
/// Expands inflow patch values back into the inflow face.
Eigen::VectorXd inflow_face_values(const Grid& grid, const BoundaryPatchField& f);

double boundary_integral(const Grid& grid, const BoundaryField& f);
double patch_integral(const Grid& grid, const BoundaryField& f, Patch patch);

template <class Fn>
ScalarField sample(const Grid& grid, Fn&& fn) {
  ScalarField out(grid.size());
  for (Index p = 0; p < grid.size(); ++p) out[p] = fn(grid.coord(p));
  return out;
}

/// fn returns an Eigen::Vector3d; only the first d components are kept.
template <class Fn>
VectorField sample_vector(const Grid& grid, Fn&& fn) {
  VectorField out(grid.size(), grid.dim());
  for (Index p = 0; p < grid.size(); ++p) {
    const Eigen::Vector3d v = fn(grid.coord(p));
    for (int c = 0; c < grid.dim(); ++c) out(p, c) = v[c];
  }
  return out;
}

/// fn(point, face) -> value.
template <class Fn>
BoundaryField sample_boundary(const Grid& grid, Fn&& fn) {
  BoundaryField out = BoundaryField::zeros(grid);
  for (int f = 0; f < grid.face_count(); ++f) {
    const auto& nodes = grid.face_nodes(f);
    for (std::size_t k = 0; k < nodes.size(); ++k)
      out.faces[f][static_cast<Index>(k)] = fn(grid.coord(nodes[k]), grid.face(f));
  }
  return out;
}

/// Field on the node lattice padded by one ghost layer. Ghosts start as NaN.
class GhostedField {
 public:
  GhostedField(const Grid& grid, const Eigen::MatrixXd& interior);

  int components() const { return static_cast<int>(values_.cols()); }
  double& at(const MultiIndex& i, int c = 0) { return values_(offset(i), c); }
  double at(const MultiIndex& i, int c = 0) const { return values_(offset(i), c); }

 private:
  Index offset(const MultiIndex& i) const;

  int dim_;
  MultiIndex padded_{1, 1, 1};
  Eigen::MatrixXd values_;
};

/// Mirror extension across the inflow or outflow face.
GhostedField extend_symmetric(const Grid& grid, const ScalarField& f, Patch across);
/// Mirror extension flipping the axial component: u(x~) = (-u1, u2, u3).
GhostedField extend_antisymmetric(const Grid& grid, const VectorField& u, Patch across);

}  // namespace nsf
