#include "nsf/study.hpp"

#include "nsf/elliptic.hpp"
#include "nsf/norms.hpp"
#include "nsf/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nsf {

namespace {
constexpr double kPi = std::numbers::pi;
}

Factor Factor::one() {
  return {[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

Factor Factor::cosine(double k) {
  return {[k](double x) { return std::cos(k * x); }, [k](double x) { return -k * std::sin(k * x); },
          [k](double x) { return -k * k * std::cos(k * x); }};
}

Factor Factor::sine(double k) {
  return {[k](double x) { return std::sin(k * x); }, [k](double x) { return k * std::cos(k * x); },
          [k](double x) { return -k * k * std::sin(k * x); }};
}

Factor Factor::clamp01() {
  return {[](double x) { return x * x * (1 - x) * (1 - x); },
          [](double x) { return 2 * x * (1 - x) * (1 - 2 * x); },
          [](double x) { return 2 - 12 * x + 12 * x * x; }};
}

Separable& Separable::add(double coef, Factor f0, Factor f1, Factor f2) {
  terms_.push_back({coef, {std::move(f0), std::move(f1), std::move(f2)}});
  return *this;
}

double Separable::eval(const Point& x, const std::array<int, 3>& order) const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    double v = t.coef;
    for (int k = 0; k < 3; ++k) {
      const Factor& f = t.parts[k];
      v *= order[k] == 0 ? f.f(x[k]) : order[k] == 1 ? f.df(x[k]) : f.ddf(x[k]);
    }
    acc += v;
  }
  return acc;
}

double Separable::value(const Point& x) const { return eval(x, {0, 0, 0}); }

double Separable::d(const Point& x, int a) const {
  std::array<int, 3> o{0, 0, 0};
  o[a] = 1;
  return eval(x, o);
}

double Separable::dd(const Point& x, int a, int b) const {
  std::array<int, 3> o{0, 0, 0};
  ++o[a];
  ++o[b];
  return eval(x, o);
}

double Separable::laplacian(const Point& x, int dim) const {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += dd(x, k, k);
  return s;
}

ScalarField Separable::sample(const Grid& grid) const {
  return nsf::sample(grid, [this](const Point& x) { return value(x); });
}

VectorField SeparableVector::sample(const Grid& grid) const {
  VectorField u(grid.size(), grid.dim());
  for (int c = 0; c < grid.dim(); ++c) u.col(c) = comp[c].sample(grid);
  return u;
}

double SeparableVector::div(const Point& x, int dim) const {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += comp[k].d(x, k);
  return s;
}

Separable manufactured_neumann(double l) {
  Separable s;
  s.add(1.0, Factor::cosine(kPi / l), Factor::cosine(kPi));
  return s;
}

Separable manufactured_temperature(double l, int dim) {
  const Factor across = dim == 3 ? Factor::clamp01() : Factor::one();
  Separable s;
  s.add(16.0, Factor::cosine(kPi / l), Factor::clamp01(), across);
  s.add(8.0, Factor::one(), Factor::clamp01(), across);
  return s;
}

SeparableVector manufactured_velocity(double l, int dim) {
  SeparableVector u;
  u.comp.resize(dim);
  const Factor z = dim == 3 ? Factor::cosine(kPi) : Factor::one();
  u.comp[0].add(1.0, Factor::sine(kPi / l), Factor::cosine(kPi), z);
  u.comp[1].add(0.5, Factor::cosine(kPi / l), Factor::sine(kPi), z);
  u.comp[1].add(0.3, Factor::sine(2 * kPi / l), Factor::sine(2 * kPi), z);
  if (dim == 3) u.comp[2].add(0.4, Factor::cosine(kPi / l), Factor::cosine(kPi), Factor::sine(kPi));
  return u;
}

Separable manufactured_density(double l) {
  Separable s;
  s.add(0.5, Factor::one(), Factor::cosine(kPi));
  s.add(0.3, Factor::sine(kPi / l), Factor::cosine(2 * kPi));
  return s;
}

SeparableVector manufactured_transport_velocity(double l, int dim, double a) {
  SeparableVector U;
  U.comp.resize(dim);
  U.comp[0].add(a, Factor::sine(kPi / l), Factor::cosine(kPi));
  U.comp[1].add(a, Factor::cosine(kPi / l), Factor::sine(kPi));
  if (dim == 3) U.comp[2].add(a, Factor::one(), Factor::one(), Factor::sine(kPi));
  return U;
}

namespace {

// d/dx1 u_c - mu Lap u_c - grad_div d_c div u.
double lame_value(const SeparableVector& u, const Point& x, int c, int dim, double mu, double nu) {
  double graddiv = 0.0;
  for (int k = 0; k < dim; ++k) graddiv += u.comp[k].dd(x, c, k);
  return u.comp[c].d(x, 0) - mu * u.comp[c].laplacian(x, dim) - nu * graddiv;
}

FaceVectorField slip_data(const Grid& grid, const SeparableVector& u, double mu, double alpha) {
  FaceVectorField B = FaceVectorField::zeros(grid);
  for (int fid = 0; fid < grid.face_count(); ++fid) {
    const Face f = grid.face(fid);
    const auto& nodes = grid.face_nodes(fid);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const Point x = grid.coord(nodes[q]);
      for (int c = 0; c < grid.dim(); ++c) {
        if (c == f.axis) continue;
        const double t = f.outward_sign() * mu * (u.comp[c].d(x, f.axis) + u.comp[f.axis].d(x, c));
        B.faces[fid](static_cast<Index>(q), c) = t + alpha * u.comp[c].value(x);
      }
    }
  }
  return B;
}

}  // namespace

LinearProblemData manufactured_linear_data(const LinearSystem& sys, const SeparableVector& u,
                                           const Separable& sigma, const Separable& eta,
                                           const SeparableVector& U) {
  const Grid& g = sys.grid();
  const auto& pp = sys.params();
  const auto& lin = sys.constants();
  const int d = g.dim();
  LinearProblemData data = LinearProblemData::zero(g);
  for (Index p = 0; p < g.size(); ++p) {
    const Point x = g.coord(p);
    const double divu = u.div(x, d);
    double adv = 0.0;
    for (int k = 0; k < d; ++k) adv += U.comp[k].value(x) * sigma.d(x, k);
    for (int c = 0; c < d; ++c)
      data.F(p, c) = lame_value(u, x, c, d, pp.mu, pp.grad_div()) + lin.p1 * sigma.d(x, c) +
                     lin.p2 * eta.d(x, c);
    data.G[p] = sigma.d(x, 0) + adv + divu;
    data.H[p] = lin.r0 * eta.d(x, 0) - pp.kappa * eta.laplacian(x, d) + lin.r1 * divu;
  }
  data.B = slip_data(g, u, pp.mu, pp.alpha);
  data.sigma_in = sigma.sample(g).head(g.slice_size());
  data.U = U.sample(g);
  return data;
}

double StudyResult::order(const std::string& problem) const {
  for (const auto& [name, o] : orders)
    if (name == problem) return o;
  throw std::out_of_range("no study problem '" + problem + "'");
}

std::string StudyResult::csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "problem,resolution,h,error,fitted_order\n";
  for (const auto& r : rows) {
    os << r.problem << ",";
    for (std::size_t k = 0; k < r.resolution.size(); ++k) os << (k ? "x" : "") << r.resolution[k];
    os << "," << r.h << "," << r.error << "," << order(r.problem) << "\n";
  }
  return os.str();
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) throw std::invalid_argument("need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<int> study_resolution(int n, double length, int dim) {
  std::vector<int> r{n};
  const int across = std::max(4, static_cast<int>(std::lround(n / length)));
  for (int k = 1; k < dim; ++k) r.push_back(across);
  return r;
}

namespace {

double scaled_error(const Grid& g, const ScalarField& a, const ScalarField& b) {
  return norm_Lp(g, (a - b).eval(), 2.0) / std::sqrt(g.domain().volume());
}

double scaled_error(const Grid& g, const VectorField& a, const VectorField& b) {
  return norm_Lp(g, (a - b).eval(), 2.0) / std::sqrt(g.domain().volume());
}

}  // namespace

StudyResult convergence_study(double length, int dim, const PhysicalParams& pp,
                              const LinearizationConstants& lin, const std::vector<int>& ns) {
  if (ns.size() < 3) throw std::invalid_argument("convergence study needs at least 3 resolutions");
  StudyResult out;
  const ChannelDomain domain(length, dim);
  const Separable phi = manufactured_neumann(length);
  const Separable theta = manufactured_temperature(length, dim);
  const SeparableVector vel = manufactured_velocity(length, dim);
  const Separable rho = manufactured_density(length);
  const SeparableVector U = manufactured_transport_velocity(length, dim, 0.05);

  for (int n : ns) {
    const Grid g = build_grid(domain, study_resolution(n, length, dim));
    const double h = g.spacing(0);
    auto row = [&](const std::string& name, double err) {
      out.rows.push_back({name, g.resolution(), h, err});
    };

    {
      NeumannProblem pr;
      pr.f = sample(g, [&](const Point& x) { return phi.laplacian(x, dim); });
      pr.flux = BoundaryField::zeros(g);
      pr.mean = 0.0;
      const ScalarField exact = phi.sample(g);
      const ScalarField u = NeumannSolver(g).solve(pr).u;
      row("neumann", scaled_error(g, u, (exact.array() - mean(g, exact)).matrix().eval()));
    }
    {
      LinearSystem sys(g, pp, lin);
      const RobinParams rp = sys.robin_params();
      const ScalarField rhs = sample(g, [&](const Point& x) {
        return rp.r0 * theta.d(x, 0) - rp.kappa * theta.laplacian(x, dim);
      });
      const BoundaryField q = sample_boundary(g, [&](const Point& x, const Face& f) {
        return rp.kappa * f.outward_sign() * theta.d(x, f.axis) + rp.L[static_cast<int>(f.patch())] * theta.value(x);
      });
      row("robin", scaled_error(g, sys.robin().solve(rhs, &q), theta.sample(g)));

      VectorField F(g.size(), dim);
      for (Index p = 0; p < g.size(); ++p)
        for (int c = 0; c < dim; ++c) F(p, c) = lame_value(vel, g.coord(p), c, dim, pp.mu, pp.grad_div());
      const FaceVectorField B = slip_data(g, vel, pp.mu, pp.alpha);
      row("lame", scaled_error(g, sys.lame().solve(F, B), vel.sample(g)));

      TransportProblem tp;
      tp.U = U.sample(g);
      tp.h = sample(g, [&](const Point& x) {
        double a = rho.d(x, 0);
        for (int k = 0; k < dim; ++k) a += U.comp[k].value(x) * rho.d(x, k);
        return a;
      });
      tp.w_in = rho.sample(g).head(g.slice_size());
      row("transport", scaled_error(g, apply_S_marching(tp, g), rho.sample(g)));

      const LinearProblemData data = manufactured_linear_data(sys, vel, rho, theta, U);
      const LinearStepResult r = solve_linear_step(data, sys, FlowState::zero(g));
      const double eu = scaled_error(g, r.state.u, vel.sample(g));
      const double es = scaled_error(g, r.state.sigma, rho.sample(g));
      const double ee = scaled_error(g, r.state.eta, theta.sample(g));
      row("linear_step", std::sqrt(eu * eu + es * es + ee * ee));

      const HelmholtzProjector helm(g);
      row("trans_identity", trans_identity(sys, data, r.state, helm).l2 / std::sqrt(g.domain().volume()));
    }
  }

  std::vector<std::string> names;
  for (const auto& r : out.rows)
    if (std::find(names.begin(), names.end(), r.problem) == names.end()) names.push_back(r.problem);
  for (const auto& name : names) {
    std::vector<double> hs, es;
    for (const auto& r : out.rows)
      if (r.problem == name) {
        hs.push_back(r.h);
        es.push_back(r.error);
      }
    out.orders.emplace_back(name, fitted_order(hs, es));
  }
  return out;
}

}  // namespace nsf
