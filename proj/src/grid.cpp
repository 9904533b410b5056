#include "nsf/grid.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsf {

const char* patch_name(Patch p) {
  switch (p) {
    case Patch::Inflow: return "inflow";
    case Patch::Outflow: return "outflow";
    case Patch::Wall: return "wall";
  }
  return "?";
}

ChannelDomain::ChannelDomain(double length, int dim) : length_(length), dim_(dim) {
  if (!(length > 0.0)) throw std::invalid_argument("channel length must be positive");
  if (dim != 2 && dim != 3) throw std::invalid_argument("dimension must be 2 or 3");
}

double ChannelDomain::patch_measure(Patch p) const {
  if (p != Patch::Wall) return 1.0;
  // Lateral faces: 2 (d=2) or 4 (d=3) faces of measure l.
  return (dim_ == 2 ? 2.0 : 4.0) * length_;
}

double ChannelDomain::boundary_measure() const {
  return patch_measure(Patch::Inflow) + patch_measure(Patch::Outflow) +
         patch_measure(Patch::Wall);
}

namespace {

double trapezoid_weight(int i, int n_nodes, double h) {
  if (n_nodes == 1) return 1.0;
  return (i == 0 || i == n_nodes - 1) ? 0.5 * h : h;
}

}  // namespace

Grid::Grid(const ChannelDomain& domain, const std::vector<int>& cells) : domain_(domain) {
  const int d = domain.dim();
  if (static_cast<int>(cells.size()) != d)
    throw std::invalid_argument("resolution must have one entry per axis");
  for (int k = 0; k < d; ++k) {
    cells_[k] = cells[k];
    nodes_[k] = cells[k] + 1;
    h_[k] = domain.extent(k) / cells[k];
  }
  stride_[2] = 1;
  stride_[1] = nodes_[2];
  stride_[0] = static_cast<Index>(nodes_[1]) * nodes_[2];
  if (d == 2) {
    stride_[1] = 1;
    stride_[2] = 0;
    stride_[0] = nodes_[1];
  }
  size_ = static_cast<Index>(nodes_[0]) * nodes_[1] * nodes_[2];

  weights_.resize(size_);
  for (Index p = 0; p < size_; ++p) {
    const MultiIndex i = multi_index(p);
    double w = 1.0;
    for (int k = 0; k < d; ++k) w *= trapezoid_weight(i[k], nodes_[k], h_[k]);
    weights_[p] = w;
  }
  slice_weights_.resize(stride_[0]);
  for (Index q = 0; q < stride_[0]; ++q) {
    const MultiIndex i = multi_index(q);
    double w = 1.0;
    for (int k = 1; k < d; ++k) w *= trapezoid_weight(i[k], nodes_[k], h_[k]);
    slice_weights_[q] = w;
  }

  face_nodes_.assign(2 * d, {});
  face_weights_.assign(2 * d, {});
  for (int f = 0; f < 2 * d; ++f) {
    const Face fc = face(f);
    std::vector<double> w;
    for (Index p = 0; p < size_; ++p) {
      if (!on_face(p, fc)) continue;
      face_nodes_[f].push_back(p);
      const MultiIndex i = multi_index(p);
      double wf = 1.0;
      for (int k = 0; k < d; ++k)
        if (k != fc.axis) wf *= trapezoid_weight(i[k], nodes_[k], h_[k]);
      w.push_back(wf);
    }
    face_weights_[f] = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Index>(w.size()));
  }

  for (Index p = 0; p < size_; ++p) {
    if (auto patch = patch_of(p)) patch_nodes_[static_cast<int>(*patch)].push_back(p);
  }
}

double Grid::min_spacing() const {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dim(); ++k) m = std::min(m, h_[k]);
  return m;
}

std::vector<int> Grid::resolution() const {
  return std::vector<int>(cells_.begin(), cells_.begin() + dim());
}

MultiIndex Grid::multi_index(Index p) const {
  MultiIndex i{0, 0, 0};
  i[0] = static_cast<int>(p / stride_[0]);
  Index r = p % stride_[0];
  if (dim() == 2) {
    i[1] = static_cast<int>(r);
  } else {
    i[1] = static_cast<int>(r / stride_[1]);
    i[2] = static_cast<int>(r % stride_[1]);
  }
  return i;
}

Point Grid::coord(Index p) const {
  const MultiIndex i = multi_index(p);
  Point x = Point::Zero();
  for (int k = 0; k < dim(); ++k) x[k] = i[k] * h_[k];
  return x;
}

bool Grid::on_face(Index p, const Face& f) const {
  const MultiIndex i = multi_index(p);
  return i[f.axis] == (f.side == 0 ? 0 : cells_[f.axis]);
}

bool Grid::on_boundary(Index p) const {
  const MultiIndex i = multi_index(p);
  for (int k = 0; k < dim(); ++k)
    if (i[k] == 0 || i[k] == cells_[k]) return true;
  return false;
}

Index Grid::face_local(int f, Index p) const {
  const Face fc = face(f);
  const MultiIndex i = multi_index(p);
  Index local = 0;
  for (int k = 0; k < dim(); ++k) {
    if (k == fc.axis) continue;
    local = local * nodes_[k] + i[k];
  }
  return local;
}

std::optional<Patch> Grid::patch_of(Index p) const {
  const MultiIndex i = multi_index(p);
  if (i[0] == 0) return Patch::Inflow;
  if (i[0] == cells_[0]) return Patch::Outflow;
  for (int k = 1; k < dim(); ++k)
    if (i[k] == 0 || i[k] == cells_[k]) return Patch::Wall;
  return std::nullopt;
}

Grid build_grid(const ChannelDomain& domain, const std::vector<int>& resolution) {
  if (static_cast<int>(resolution.size()) != domain.dim())
    throw std::invalid_argument("resolution must have one entry per axis");
  for (int n : resolution)
    if (n < 4) throw std::invalid_argument("resolution must be at least 4 cells per axis");
  return Grid(domain, resolution);
}

BoundaryField BoundaryField::zeros(const Grid& grid) {
  BoundaryField b;
  for (int f = 0; f < grid.face_count(); ++f)
    b.faces.push_back(Eigen::VectorXd::Zero(static_cast<Index>(grid.face_nodes(f).size())));
  return b;
}

BoundaryField& BoundaryField::operator+=(const BoundaryField& o) {
  for (std::size_t f = 0; f < faces.size(); ++f) faces[f] += o.faces[f];
  return *this;
}

BoundaryField& BoundaryField::operator*=(double s) {
  for (auto& v : faces) v *= s;
  return *this;
}

FaceVectorField FaceVectorField::zeros(const Grid& grid) {
  FaceVectorField b;
  for (int f = 0; f < grid.face_count(); ++f)
    b.faces.push_back(
        Eigen::MatrixXd::Zero(static_cast<Index>(grid.face_nodes(f).size()), grid.dim()));
  return b;
}

BoundaryPatchField make_patch_field(const Grid& grid, Patch patch, Eigen::VectorXd values) {
  const auto expected = static_cast<Index>(grid.patch_nodes(patch).size());
  if (values.size() != expected)
    throw std::invalid_argument(std::string("patch field size mismatch on ") +
                                patch_name(patch));
  return {patch, std::move(values)};
}

BoundaryPatchField restrict_to_patch(const Grid& grid, const BoundaryField& f, Patch patch) {
  const auto& nodes = grid.patch_nodes(patch);
  Eigen::VectorXd v(static_cast<Index>(nodes.size()));
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Index p = nodes[k];
    for (int fid = 0; fid < grid.face_count(); ++fid) {
      const Face fc = grid.face(fid);
      if (fc.patch() == patch && grid.on_face(p, fc)) {
        v[static_cast<Index>(k)] = f.faces[fid][grid.face_local(fid, p)];
        break;
      }
    }
  }
  return {patch, v};
}

Eigen::VectorXd inflow_face_values(const Grid&, const BoundaryPatchField& f) {
  if (f.patch != Patch::Inflow) throw std::invalid_argument("expected an inflow patch field");
  // Every inflow face node wins the tie-break, so the orders coincide.
  return f.values;
}

double boundary_integral(const Grid& grid, const BoundaryField& f) {
  double s = 0.0;
  for (int fid = 0; fid < grid.face_count(); ++fid) s += grid.face_weights(fid).dot(f.faces[fid]);
  return s;
}

double patch_integral(const Grid& grid, const BoundaryField& f, Patch patch) {
  double s = 0.0;
  for (int fid = 0; fid < grid.face_count(); ++fid)
    if (grid.face(fid).patch() == patch) s += grid.face_weights(fid).dot(f.faces[fid]);
  return s;
}

GhostedField::GhostedField(const Grid& grid, const Eigen::MatrixXd& interior)
    : dim_(grid.dim()) {
  for (int k = 0; k < dim_; ++k) padded_[k] = grid.nodes(k) + 2;
  const Index n = static_cast<Index>(padded_[0]) * padded_[1] * padded_[2];
  values_ = Eigen::MatrixXd::Constant(n, interior.cols(), std::numeric_limits<double>::quiet_NaN());
  for (Index p = 0; p < grid.size(); ++p) values_.row(offset(grid.multi_index(p))) = interior.row(p);
}

Index GhostedField::offset(const MultiIndex& i) const {
  Index o = 0;
  for (int k = 0; k < dim_; ++k) {
    const int j = i[k] + 1;
    if (j < 0 || j >= padded_[k]) throw std::out_of_range("ghosted index out of range");
    o = o * padded_[k] + j;
  }
  return o;
}

namespace {

void check_reflectable(Patch across) {
  if (across == Patch::Wall)
    throw std::invalid_argument("reflection is defined across inflow/outflow faces only");
}

template <class Fill>
void fill_face_ghosts(const Grid& grid, Patch across, Fill&& fill) {
  const int n0 = grid.cells(0);
  const int boundary = across == Patch::Inflow ? 0 : n0;
  const int step = across == Patch::Inflow ? 1 : -1;
  for (Index p = 0; p < grid.size(); ++p) {
    MultiIndex i = grid.multi_index(p);
    if (i[0] != boundary) continue;
    MultiIndex ghost = i;
    ghost[0] = boundary - step;
    MultiIndex mirror = i;
    mirror[0] = boundary + step;
    fill(ghost, grid.index(mirror));
  }
}

}  // namespace

GhostedField extend_symmetric(const Grid& grid, const ScalarField& f, Patch across) {
  check_reflectable(across);
  GhostedField g(grid, f);
  fill_face_ghosts(grid, across, [&](const MultiIndex& ghost, Index mirror) {
    g.at(ghost) = f[mirror];
  });
  return g;
}

GhostedField extend_antisymmetric(const Grid& grid, const VectorField& u, Patch across) {
  check_reflectable(across);
  GhostedField g(grid, u);
  fill_face_ghosts(grid, across, [&](const MultiIndex& ghost, Index mirror) {
    g.at(ghost, 0) = -u(mirror, 0);
    for (int c = 1; c < grid.dim(); ++c) g.at(ghost, c) = u(mirror, c);
  });
  return g;
}

}  // namespace nsf
