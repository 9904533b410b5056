#include "nsf/data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace nsf {

ProblemData background_data(const Grid& grid, const PhysicalParams& pp) {
  ProblemData data;
  data.f = VectorField::Zero(grid.size(), grid.dim());
  data.b = FaceVectorField::zeros(grid);
  data.d = BoundaryField::zeros(grid);
  data.g = BoundaryField::zeros(grid);
  data.T1 = BoundaryField::zeros(grid);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    if (f.axis == 0)
      data.d.faces[fid].setConstant(f.outward_sign());
    else
      data.b.faces[fid].col(0).setConstant(pp.alpha);
  }
  data.rho_in = Eigen::VectorXd::Ones(static_cast<Index>(grid.face_nodes(0).size()));
  return data;
}

void validate_data(const Grid& grid, const ProblemData& data) {
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    const auto& v = data.d.faces[fid];
    switch (f.patch()) {
      case Patch::Inflow:
        if (v.maxCoeff() >= 0.0) throw std::invalid_argument("normal velocity datum must be negative on the inflow face");
        break;
      case Patch::Outflow:
        if (v.minCoeff() <= 0.0) throw std::invalid_argument("normal velocity datum must be positive on the outflow face");
        break;
      case Patch::Wall:
        if (v.cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument("normal velocity datum must vanish on the walls");
        break;
    }
  }
  if (data.rho_in.minCoeff() <= 0.0) throw std::invalid_argument("inflow density must be positive");
}

double Profile::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Profile parse_profile(const std::string& text) {
  Profile pr;
  const std::string trimmed = std::regex_replace(text, std::regex("^\\s+|\\s+$"), "");
  if (trimmed.empty()) return pr;
  if (trimmed.size() > 4 && trimmed.substr(trimmed.size() - 4) == ".csv") {
    pr.kind = "csv";
    pr.csv_path = trimmed;
    return pr;
  }
  static const std::regex call(R"(^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?$)");
  std::smatch m;
  if (!std::regex_match(trimmed, m, call)) throw std::invalid_argument("cannot parse profile '" + text + "'");
  pr.kind = m[1];
  const std::string args = m[2];
  static const std::regex kv(R"(\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([-+0-9.eE]+)\s*)");
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (std::regex_replace(item, std::regex("\\s+"), "").empty()) continue;
    std::smatch km;
    if (!std::regex_match(item, km, kv)) throw std::invalid_argument("bad profile argument '" + item + "'");
    pr.params[km[1]] = std::stod(km[2]);
  }
  static const char* known[] = {"zero", "constant", "cosine", "sine", "bump", "hump", "linear", "swirl"};
  bool ok = false;
  for (const char* k : known) ok = ok || pr.kind == k;
  if (!ok) throw std::invalid_argument("unknown profile '" + pr.kind + "'");
  return pr;
}

namespace {

constexpr double kPi = std::numbers::pi;

double shape(const Profile& pr, double s) {
  const double a = pr.param("amplitude", 1.0);
  const double k = pr.param("mode", 1.0);
  if (pr.kind == "zero") return 0.0;
  if (pr.kind == "constant") return pr.param("value", 0.0);
  if (pr.kind == "cosine") return a * std::cos(k * kPi * s);
  if (pr.kind == "sine") return a * std::sin(k * kPi * s);
  if (pr.kind == "bump") return a * 0.5 * (std::cos(2 * kPi * s) - std::cos(4 * kPi * s));
  if (pr.kind == "hump") return a * 16.0 * s * s * (1.0 - s) * (1.0 - s);
  if (pr.kind == "linear") return a * s;
  throw std::invalid_argument("profile '" + pr.kind + "' is not a boundary profile");
}

struct CsvTable {
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open profile file " + path);
  CsvTable t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find_first_of("abcdfghijklmnopqrstuvwxyzABCDFGHIJKLMNOPQRSTUVWXYZ_") != std::string::npos) continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    t.rows.push_back(row);
  }
  return t;
}

const std::vector<double>& csv_lookup(const CsvTable& t, const Point& x, int d, const std::string& path) {
  for (const auto& r : t.rows) {
    if (static_cast<int>(r.size()) <= d) continue;
    bool hit = true;
    for (int k = 0; k < d; ++k) hit = hit && std::abs(r[k] - x[k]) < 1e-9;
    if (hit) return r;
  }
  std::ostringstream os;
  os << "profile file " << path << " has no row for node (" << x.head(d).transpose() << ")";
  throw std::invalid_argument(os.str());
}

}  // namespace

double boundary_profile(const Profile& pr, const Point& x, const Face& face, double length) {
  const double s = face.axis == 0 ? x[1] : x[0] / length;
  return shape(pr, s);
}

BoundaryField sample_boundary_profile(const Grid& grid, const Profile& pr, bool in_out, bool walls) {
  BoundaryField out = BoundaryField::zeros(grid);
  CsvTable table;
  if (pr.kind == "csv") table = read_csv(pr.csv_path);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    const bool active = f.axis == 0 ? in_out : walls;
    if (!active) continue;
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const Point x = grid.coord(nodes[q]);
      out.faces[fid][static_cast<Index>(q)] =
          pr.kind == "csv" ? csv_lookup(table, x, grid.dim(), pr.csv_path)[grid.dim()]
                           : boundary_profile(pr, x, f, grid.domain().length());
    }
  }
  return out;
}

VectorField sample_volume_profile(const Grid& grid, const Profile& pr) {
  const int d = grid.dim();
  const double l = grid.domain().length();
  VectorField f = VectorField::Zero(grid.size(), d);
  if (pr.kind == "zero") return f;
  if (pr.kind == "csv") {
    const CsvTable table = read_csv(pr.csv_path);
    for (Index p = 0; p < grid.size(); ++p) {
      const auto& r = csv_lookup(table, grid.coord(p), d, pr.csv_path);
      for (int c = 0; c < d && d + c < static_cast<int>(r.size()); ++c) f(p, c) = r[d + c];
    }
    return f;
  }
  const int comp = static_cast<int>(pr.param("component", 1.0)) - 1;
  if (comp < 0 || comp >= d) throw std::invalid_argument("volume profile component out of range");
  const double a = pr.param("amplitude", 1.0);
  const double k = pr.param("mode", 1.0);
  for (Index p = 0; p < grid.size(); ++p) {
    const Point x = grid.coord(p);
    if (pr.kind == "constant") {
      f(p, comp) = pr.param("value", 0.0);
    } else if (pr.kind == "cosine") {
      f(p, comp) = a * std::cos(k * kPi * x[0] / l) * std::cos(k * kPi * x[1]);
    } else if (pr.kind == "sine") {
      f(p, comp) = a * std::sin(k * kPi * x[0] / l) * std::sin(k * kPi * x[1]);
    } else if (pr.kind == "bump" || pr.kind == "hump") {
      f(p, comp) = a * std::sin(kPi * x[0] / l) * std::sin(kPi * x[1]);
    } else if (pr.kind == "swirl") {
      f(p, 0) = a * std::sin(kPi * x[0] / l) * std::cos(kPi * x[1]);
      f(p, 1) = -a * std::cos(kPi * x[0] / l) * std::sin(kPi * x[1]);
    } else {
      throw std::invalid_argument("profile '" + pr.kind + "' is not a volume profile");
    }
  }
  return f;
}

ProblemData build_problem_data(const Grid& grid, const PhysicalParams& pp, const DataProfiles& pr) {
  ProblemData data = background_data(grid, pp);
  const double s = pr.scale;
  data.f = s * sample_volume_profile(grid, pr.f);

  BoundaryField dd = sample_boundary_profile(grid, pr.d, true, false);
  dd *= s;
  data.d += dd;

  const BoundaryField bb = sample_boundary_profile(grid, pr.b, true, true);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    for (int c = 0; c < grid.dim(); ++c)
      if (c != f.axis) data.b.faces[fid].col(c) += s * bb.faces[fid];
  }

  const BoundaryField rho = sample_boundary_profile(grid, pr.rho_in, true, false);
  data.rho_in.array() += s * rho.faces[Grid::face_id({0, 0})].array();

  data.g = sample_boundary_profile(grid, pr.g, true, false);
  data.g *= s;
  data.T1 = sample_boundary_profile(grid, pr.T1, false, true);
  data.T1 *= s;
  return data;
}

}  // namespace nsf
