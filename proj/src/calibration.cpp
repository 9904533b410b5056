#include "nsf/calibration.hpp"

#include "nsf/fd.hpp"
#include "nsf/norms.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nsf {

namespace {

constexpr double kPi = std::numbers::pi;

template <class M>
void scale_to_max(M& f, double scale) {
  const double m = f.cwiseAbs().maxCoeff();
  if (m > 0.0) f *= scale / m;
}

}  // namespace

RandomFields::RandomFields(const Grid& grid, std::uint64_t seed) : grid_(&grid), rng_(seed) {}

double RandomFields::uniform(double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng_);
}

ScalarField RandomFields::smooth_scalar(int modes) {
  const Grid& g = *grid_;
  const int d = g.dim();
  struct Mode {
    std::array<int, 3> k;
    std::array<double, 3> phase;
    double amp;
  };
  std::vector<Mode> ms;
  const int k3max = d == 3 ? modes : 1;
  for (int a = 0; a < modes; ++a)
    for (int b = 0; b < modes; ++b)
      for (int c = 0; c < k3max; ++c) {
        Mode m;
        m.k = {a, b, c};
        // A phase only matters along axes with a nonzero wavenumber; the magnitude is kept
        // within a factor of two so no mode of the family degenerates.
        for (int k = 0; k < 3; ++k) m.phase[k] = m.k[k] ? uniform(0.0, 2.0 * kPi) : 0.0;
        const double sign = uniform(-1.0, 1.0) < 0.0 ? -1.0 : 1.0;
        m.amp = sign * uniform(0.5, 1.0) / (1.0 + a * a + b * b + c * c);
        ms.push_back(m);
      }
  ScalarField f(g.size());
  for (Index p = 0; p < g.size(); ++p) {
    const Point x = g.coord(p);
    double acc = 0.0;
    for (const auto& m : ms) {
      double t = m.amp;
      for (int k = 0; k < d; ++k) t *= std::cos(m.k[k] * kPi * x[k] / g.domain().extent(k) + m.phase[k]);
      acc += t;
    }
    f[p] = acc;
  }
  return f;
}

VectorField RandomFields::smooth_vector(int modes) {
  VectorField u(grid_->size(), grid_->dim());
  for (int c = 0; c < grid_->dim(); ++c) u.col(c) = smooth_scalar(modes);
  return u;
}

VectorField RandomFields::tangent_vector(int modes) {
  const Grid& g = *grid_;
  VectorField u = smooth_vector(modes);
  for (Index p = 0; p < g.size(); ++p) {
    const Point x = g.coord(p);
    for (int c = 0; c < g.dim(); ++c) u(p, c) *= std::sin(kPi * x[c] / g.domain().extent(c));
  }
  // Exact zeros on the faces regardless of rounding in sin(pi).
  for (int c = 0; c < g.dim(); ++c)
    for (Index p = 0; p < g.size(); ++p)
      if (is_normal_row(g, p, c)) u(p, c) = 0.0;
  return u;
}

Eigen::VectorXd RandomFields::inflow_profile(int modes) {
  const ScalarField f = smooth_scalar(modes);
  return f.head(grid_->slice_size());
}

FlowState RandomFields::smooth_state(double scale) {
  FlowState s;
  s.u = tangent_vector();
  scale_to_max(s.u, scale);
  s.sigma = smooth_scalar();
  scale_to_max(s.sigma, scale);
  s.eta = smooth_scalar();
  scale_to_max(s.eta, scale);
  return s;
}

LinearProblemData RandomFields::linear_data(double scale, double velocity_scale) {
  const Grid& g = *grid_;
  LinearProblemData d = LinearProblemData::zero(g);
  d.F = scale * smooth_vector();
  d.G = scale * smooth_scalar();
  d.H = scale * smooth_scalar();
  const VectorField b = smooth_vector();
  for (int fid = 0; fid < g.face_count(); ++fid) {
    const Face f = g.face(fid);
    const auto& nodes = g.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q)
      for (int c = 0; c < g.dim(); ++c)
        if (c != f.axis) d.B.faces[fid](static_cast<Index>(q), c) = scale * b(nodes[q], c);
  }
  d.sigma_in = scale * inflow_profile();
  d.U = tangent_vector();
  scale_to_max(d.U, velocity_scale);
  return d;
}

TransportProblem RandomFields::transport_problem(double velocity_scale) {
  TransportProblem tp;
  tp.U = tangent_vector();
  scale_to_max(tp.U, velocity_scale);
  tp.h = smooth_scalar();
  tp.w_in = inflow_profile();
  return tp;
}

const CalibrationEntry& Calibration::at(const std::string& id) const {
  const auto it = entries.find(id);
  if (it == entries.end()) throw std::out_of_range("no calibration constant for '" + id + "'");
  return it->second;
}

std::string interpolation_id(double eps) {
  std::ostringstream os;
  os << "interpolation_eps=" << eps;
  return os.str();
}

namespace {

using SampleFn = std::function<InequalitySides(RandomFields&)>;

struct Checker {
  std::string id;
  int samples;
  SampleFn sample;
};

std::vector<Checker> checkers(const Grid& grid, const LinearSystem& sys, const CalibrationOptions& opts) {
  std::vector<Checker> out;
  const auto& pp = sys.params();
  out.push_back({"poincare_boundary", opts.scalar_samples, [&grid](RandomFields& rf) {
                   return poincare_boundary_sides(grid, rf.smooth_scalar(), poincare_boundary_target(),
                                                  poincare_boundary_control());
                 }});
  out.push_back({"poincare_volume", opts.scalar_samples, [&grid](RandomFields& rf) {
                   return poincare_volume_sides(grid, rf.smooth_scalar(), poincare_volume_control());
                 }});
  out.push_back({"korn", opts.scalar_samples, [&grid, pp](RandomFields& rf) {
                   return korn_sides(grid, rf.smooth_vector(), pp.mu, pp.alpha);
                 }});
  for (double eps : opts.interpolation_eps)
    out.push_back({interpolation_id(eps), opts.scalar_samples, [&grid, eps, p = opts.p](RandomFields& rf) {
                     return interpolation_sides(grid, rf.smooth_scalar(), eps, p);
                   }});
  out.push_back({"energy", opts.energy_samples, [&grid, &sys](RandomFields& rf) {
                   const LinearProblemData data = rf.linear_data(1.0, 0.05);
                   const LinearStepResult r = solve_linear_step(data, sys, FlowState::zero(grid));
                   return energy_sides(grid, data, r.state);
                 }});
  out.push_back({"transport", opts.transport_samples, [&grid](RandomFields& rf) {
                   const TransportProblem tp = rf.transport_problem(0.05);
                   return transport_sides(grid, tp.w_in, tp.h, apply_S_marching(tp, grid));
                 }});
  return out;
}

double ratio_of(const InequalitySides& s) { return s.rhs > 0.0 ? s.lhs / s.rhs : 0.0; }

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Calibration calibrate(const Grid& grid, const LinearSystem& sys, const CalibrationOptions& opts) {
  Calibration cal;
  cal.seed = opts.seed;
  cal.length = grid.domain().length();
  cal.resolution = grid.resolution();
  cal.drift = opts.drift;
  RandomFields rf(grid, opts.seed);
  for (const auto& ch : checkers(grid, sys, opts)) {
    std::vector<double> ratios;
    for (int i = 0; i < ch.samples; ++i) ratios.push_back(ratio_of(ch.sample(rf)));
    CalibrationEntry e;
    e.samples = ch.samples;
    e.observed_max = *std::max_element(ratios.begin(), ratios.end());
    e.median = median_of(ratios);
    e.constant = opts.drift * std::max(e.observed_max, 0.0);
    cal.entries[ch.id] = e;
  }
  return cal;
}

std::vector<InequalityVerdict> verify_inequalities(const Grid& grid, const LinearSystem& sys,
                                                   const Calibration& cal, std::uint64_t seed,
                                                   const CalibrationOptions& opts) {
  std::vector<InequalityVerdict> out;
  RandomFields rf(grid, seed);
  for (const auto& ch : checkers(grid, sys, opts)) {
    if (!cal.has(ch.id)) continue;
    const CalibrationEntry& e = cal.at(ch.id);
    InequalitySides worst;
    double worst_ratio = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < ch.samples; ++i) {
      const InequalitySides s = ch.sample(rf);
      if (ratio_of(s) > worst_ratio) {
        worst_ratio = ratio_of(s);
        worst = s;
      }
    }
    out.push_back(make_verdict(ch.id, worst, e.constant, e.median));
  }
  return out;
}

std::string calibration_to_json(const Calibration& cal) {
  nlohmann::ordered_json j;
  j["seed"] = cal.seed;
  j["grid"] = {{"length", cal.length}, {"resolution", cal.resolution}};
  j["drift"] = cal.drift;
  nlohmann::ordered_json ent = nlohmann::ordered_json::object();
  for (const auto& [id, e] : cal.entries)
    ent[id] = {{"constant", e.constant}, {"observed_max", e.observed_max}, {"median", e.median},
               {"samples", e.samples}};
  j["constants"] = ent;
  return j.dump(2) + "\n";
}

Calibration calibration_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Calibration cal;
  cal.seed = j.at("seed").get<std::uint64_t>();
  cal.length = j.at("grid").at("length").get<double>();
  cal.resolution = j.at("grid").at("resolution").get<std::vector<int>>();
  cal.drift = j.value("drift", 2.0);
  for (const auto& [id, e] : j.at("constants").items()) {
    CalibrationEntry c;
    c.constant = e.at("constant").get<double>();
    c.observed_max = e.value("observed_max", 0.0);
    c.median = e.value("median", 0.0);
    c.samples = e.value("samples", 0);
    cal.entries[id] = c;
  }
  return cal;
}

void save_calibration(const std::string& path, const Calibration& cal) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << calibration_to_json(cal);
}

Calibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return calibration_from_json(ss.str());
}

}  // namespace nsf
