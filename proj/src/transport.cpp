#include "nsf/transport.hpp"

#include "nsf/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nsf {

void validate_transport(const Grid& grid, const VectorField& U) {
  if (U.rows() != grid.size() || U.cols() != grid.dim())
    throw TransportError("transport velocity has the wrong shape");
  for (Index p = 0; p < grid.size(); ++p) {
    if (1.0 + U(p, 0) < 0.5) {
      std::ostringstream os;
      os << "transport requires 1 + U1 >= 1/2; violated at node " << p;
      throw TransportError(os.str());
    }
    const MultiIndex mi = grid.multi_index(p);
    for (int k = 1; k < grid.dim(); ++k)
      if ((mi[k] == 0 || mi[k] == grid.cells(k)) && std::abs(U(p, k)) > 1e-12) {
        std::ostringstream os;
        os << "transport velocity not tangent to the wall at node " << p;
        throw TransportError(os.str());
      }
  }
}

double marching_courant(const Grid& grid, const VectorField& U) {
  double worst = 0.0;
  for (Index p = 0; p < grid.size(); ++p) {
    double c = 0.0;
    for (int k = 1; k < grid.dim(); ++k)
      c += std::abs(U(p, k) / (1.0 + U(p, 0))) * grid.spacing(0) / grid.spacing(k);
    worst = std::max(worst, c);
  }
  return worst;
}

namespace {

double upwind(const Grid& grid, const ScalarField& w, Index p, const MultiIndex& mi, int k,
              double a) {
  if (a == 0.0) return 0.0;
  const Index s = grid.stride(k);
  const double h = grid.spacing(k);
  const bool backward = a > 0.0 ? mi[k] > 0 : mi[k] == grid.cells(k);
  return backward ? (w[p] - w[p - s]) / h : (w[p + s] - w[p]) / h;
}

}  // namespace

ScalarField apply_S_marching(const TransportProblem& pr, const Grid& grid) {
  validate_transport(grid, pr.U);
  const double cfl = marching_courant(grid, pr.U);
  if (cfl > 1.0) {
    std::ostringstream os;
    os << "upwind march not monotone (lateral Courant number " << cfl
       << " > 1); refine the x1 resolution";
    throw TransportError(os.str());
  }
  const Index m = grid.slice_size();
  if (pr.w_in.size() != m) throw TransportError("inflow data size mismatch");
  const double h1 = grid.spacing(0);
  ScalarField w = ScalarField::Zero(grid.size());
  w.head(m) = pr.w_in;
  for (int i = 0; i + 1 < grid.nodes(0); ++i) {
    parallel_for(0, m, [&](Index q) {
      const Index p = i * m + q;
      const MultiIndex mi = grid.multi_index(p);
      const double denom = 1.0 + pr.U(p, 0);
      double adv = 0.0;
      for (int k = 1; k < grid.dim(); ++k) {
        const double a = pr.U(p, k) / denom;
        adv += a * upwind(grid, w, p, mi, k, a);
      }
      w[p + m] = (w[p] + h1 * (pr.h[p] / denom - adv)) / (1.0 + h1 * pr.gamma / denom);
    });
  }
  return w;
}

ScalarField marching_operator(const Grid& grid, const VectorField& U, const ScalarField& w,
                              double gamma) {
  const Index m = grid.slice_size();
  const double h1 = grid.spacing(0);
  ScalarField out = ScalarField::Zero(grid.size());
  for (Index p = 0; p + m < grid.size(); ++p) {
    const MultiIndex mi = grid.multi_index(p);
    const double denom = 1.0 + U(p, 0);
    double acc = denom * (w[p + m] - w[p]) / h1 + gamma * w[p + m];
    for (int k = 1; k < grid.dim(); ++k) acc += U(p, k) * upwind(grid, w, p, mi, k, U(p, k) / denom);
    out[p] = acc;
  }
  return out;
}

double multilinear(const Grid& grid, const ScalarField& f, const Point& x) {
  const int d = grid.dim();
  std::array<int, 3> cell{0, 0, 0};
  std::array<double, 3> t{0.0, 0.0, 0.0};
  for (int k = 0; k < d; ++k) {
    const double ext = grid.domain().extent(k);
    const double xk = std::clamp(x[k], 0.0, ext) / grid.spacing(k);
    cell[k] = std::min(static_cast<int>(std::floor(xk)), grid.cells(k) - 1);
    t[k] = xk - cell[k];
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    MultiIndex i{0, 0, 0};
    double wgt = 1.0;
    for (int k = 0; k < d; ++k) {
      const int bit = (corner >> k) & 1;
      i[k] = cell[k] + bit;
      wgt *= bit ? t[k] : 1.0 - t[k];
    }
    acc += wgt * f[grid.index(i)];
  }
  return acc;
}

VelocitySampler multilinear_sampler(const Grid& grid, const VectorField& U) {
  return [&grid, U](const Point& x) {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (int c = 0; c < grid.dim(); ++c) v[c] = multilinear(grid, U.col(c), x);
    return v;
  };
}

namespace {

Eigen::Vector3d transported_velocity(const VelocitySampler& U, const Point& x) {
  Eigen::Vector3d v = U(x);
  v[0] += 1.0;
  return v;
}

Trajectory trace(const Grid& grid, const VelocitySampler& U, const Point& seed, double ds) {
  const double l = grid.domain().length();
  const int d = grid.dim();
  Trajectory tr;
  Point x = seed;
  double s = 0.0;
  tr.s.push_back(s);
  tr.x.push_back(x);
  tr.velocity.push_back(transported_velocity(U, x));
  const long max_steps = static_cast<long>(4.0 * l / ds) + 1000;
  for (long step = 0; x[0] < l - 1e-13; ++step) {
    if (step > max_steps) throw TransportError("characteristic did not reach the outflow face");
    const Eigen::Vector3d v0 = tr.velocity.back();
    double dt = ds;
    if (x[0] + ds * v0[0] > l) dt = (l - x[0]) / v0[0];
    const Eigen::Vector3d k1 = v0;
    const Eigen::Vector3d k2 = transported_velocity(U, x + 0.5 * dt * k1);
    const Eigen::Vector3d k3 = transported_velocity(U, x + 0.5 * dt * k2);
    const Eigen::Vector3d k4 = transported_velocity(U, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    s += dt;
    for (int k = 1; k < d; ++k) {
      if (x[k] < -1e-8 || x[k] > 1.0 + 1e-8) {
        std::ostringstream os;
        os << "characteristic from (" << seed.transpose() << ") left the channel laterally at s="
           << s << " (wall tangency violated)";
        throw TransportError(os.str());
      }
      x[k] = std::clamp(x[k], 0.0, 1.0);
    }
    tr.s.push_back(s);
    tr.x.push_back(x);
    tr.velocity.push_back(transported_velocity(U, x));
  }
  return tr;
}

double hermite(double y0, double y1, double m0, double m1, double len, double t) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * len * m0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * len * m1;
}

/// Where a trajectory crosses the plane x1 = target.
struct Crossing {
  bool ok = false;
  Point x = Point::Zero();
  double value = 0.0;  // damped inflow value plus the damped integral of h
};

Crossing cross(const Grid& grid, const Trajectory& tr, const std::vector<double>& integral,
               const ScalarField& h, double w0, double gamma, double target) {
  Crossing c;
  const std::size_t n = tr.x.size();
  if (target <= tr.x.front()[0]) {
    c.ok = true;
    c.x = tr.x.front();
    c.value = w0;
    return c;
  }
  if (target >= tr.x.back()[0]) {
    if (target - tr.x.back()[0] > 1e-10) return c;
    c.ok = true;
    c.x = tr.x.back();
    c.value = std::exp(-gamma * tr.s.back()) * (w0 + integral.back());
    return c;
  }
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (tr.x[mid][0] <= target ? lo : hi) = mid;
  }
  const double len = tr.s[hi] - tr.s[lo];
  auto position = [&](double t, int k) {
    return hermite(tr.x[lo][k], tr.x[hi][k], tr.velocity[lo][k], tr.velocity[hi][k], len, t);
  };
  double a = 0.0, b = 1.0;
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    const double m = 0.5 * (a + b);
    (position(m, 0) < target ? a : b) = m;
    if (std::abs(position(0.5 * (a + b), 0) - target) < 1e-12) break;
  }
  const double t = 0.5 * (a + b);
  if (std::abs(position(t, 0) - target) > 1e-10) return c;
  c.ok = true;
  for (int k = 0; k < grid.dim(); ++k) c.x[k] = position(t, k);
  c.x[0] = target;
  const double s = tr.s[lo] + t * len;
  const double hx = std::exp(gamma * s) * multilinear(grid, h, c.x);
  const double h_lo = std::exp(gamma * tr.s[lo]) * multilinear(grid, h, tr.x[lo]);
  c.value = std::exp(-gamma * s) * (w0 + integral[lo] + t * len * 0.5 * (h_lo + hx));
  return c;
}

}  // namespace

CharacteristicMap build_characteristics(const Grid& grid, const VelocitySampler& U, double ds) {
  CharacteristicMap map;
  map.ds = ds > 0.0 ? ds : 0.5 * grid.min_spacing();
  const auto& seeds = grid.face_nodes(Grid::face_id({0, 0}));
  map.trajectories.resize(seeds.size());
  parallel_for(0, static_cast<Index>(seeds.size()), [&](Index t) {
    map.trajectories[t] = trace(grid, U, grid.coord(seeds[t]), map.ds);
  });
  return map;
}

CharacteristicMap build_characteristics(const TransportProblem& problem, const Grid& grid,
                                        double ds) {
  validate_transport(grid, problem.U);
  return build_characteristics(grid, multilinear_sampler(grid, problem.U), ds);
}

namespace {

// Inverse bilinear map of the quad (p00, p10, p01, p11) at point y.
bool invert_bilinear(const Eigen::Vector2d& p00, const Eigen::Vector2d& p10,
                     const Eigen::Vector2d& p01, const Eigen::Vector2d& p11,
                     const Eigen::Vector2d& y, Eigen::Vector2d& xi) {
  xi = Eigen::Vector2d(0.5, 0.5);
  for (int it = 0; it < 50; ++it) {
    const double a = xi[0], b = xi[1];
    const Eigen::Vector2d f = (1 - a) * (1 - b) * p00 + a * (1 - b) * p10 + (1 - a) * b * p01 +
                              a * b * p11 - y;
    Eigen::Matrix2d J;
    J.col(0) = (1 - b) * (p10 - p00) + b * (p11 - p01);
    J.col(1) = (1 - a) * (p01 - p00) + a * (p11 - p10);
    const Eigen::Vector2d step = J.inverse() * f;
    xi -= step;
    if (step.norm() < 1e-14) break;
  }
  return xi.allFinite();
}

}  // namespace

ScalarField apply_S_characteristic(const TransportProblem& pr, const CharacteristicMap& map,
                                   const Grid& grid) {
  const Index m = grid.slice_size();
  const auto ntraj = map.trajectories.size();
  if (static_cast<Index>(ntraj) != m || pr.w_in.size() != m)
    throw TransportError("characteristic map does not match the inflow face");

  std::vector<std::vector<double>> integral(ntraj);
  parallel_for(0, static_cast<Index>(ntraj), [&](Index t) {
    const auto& tr = map.trajectories[t];
    auto& I = integral[t];
    I.assign(tr.x.size(), 0.0);
    // Along a trajectory dw/ds = h - gamma w; integrate exp(gamma s) h.
    double prev = multilinear(grid, pr.h, tr.x[0]);
    for (std::size_t k = 1; k < tr.x.size(); ++k) {
      const double cur = std::exp(pr.gamma * tr.s[k]) * multilinear(grid, pr.h, tr.x[k]);
      I[k] = I[k - 1] + 0.5 * (tr.s[k] - tr.s[k - 1]) * (prev + cur);
      prev = cur;
    }
  });

  ScalarField w = ScalarField::Zero(grid.size());
  std::vector<std::vector<Index>> failures(grid.nodes(0));
  const int d = grid.dim();
  parallel_for(0, grid.nodes(0), [&](Index i) {
    const double x1 = i * grid.spacing(0);
    std::vector<Crossing> cr(ntraj);
    for (std::size_t t = 0; t < ntraj; ++t)
      cr[t] = cross(grid, map.trajectories[t], integral[t], pr.h, pr.w_in[static_cast<Index>(t)],
                    pr.gamma, x1);
    for (Index q = 0; q < m; ++q) {
      const Index p = i * m + q;
      const Point x = grid.coord(p);
      if (d == 2) {
        const std::size_t n = ntraj;
        bool ok = true;
        for (const auto& c : cr) ok = ok && c.ok;
        if (!ok || x[1] < cr.front().x[1] - 1e-10 || x[1] > cr.back().x[1] + 1e-10) {
          failures[i].push_back(p);
          continue;
        }
        std::size_t lo = 0, hi = n - 1;
        while (hi - lo > 1) {
          const std::size_t mid = (lo + hi) / 2;
          (cr[mid].x[1] <= x[1] ? lo : hi) = mid;
        }
        const double gap = cr[hi].x[1] - cr[lo].x[1];
        const double theta = gap > 0 ? std::clamp((x[1] - cr[lo].x[1]) / gap, 0.0, 1.0) : 0.0;
        w[p] = (1 - theta) * cr[lo].value + theta * cr[hi].value;
      } else {
        const int n2 = grid.nodes(1), n3 = grid.nodes(2);
        auto at = [&](int a, int b) -> const Crossing& { return cr[static_cast<std::size_t>(a * n3 + b)]; };
        int a = std::min(static_cast<int>(x[1] / grid.spacing(1)), n2 - 2);
        int b = std::min(static_cast<int>(x[2] / grid.spacing(2)), n3 - 2);
        bool found = false;
        for (int walk = 0; walk < 4 * (n2 + n3) && !found; ++walk) {
          const Crossing &c00 = at(a, b), &c10 = at(a + 1, b), &c01 = at(a, b + 1), &c11 = at(a + 1, b + 1);
          if (!(c00.ok && c10.ok && c01.ok && c11.ok)) break;
          Eigen::Vector2d xi;
          const Eigen::Vector2d y(x[1], x[2]);
          if (!invert_bilinear(c00.x.segment<2>(1), c10.x.segment<2>(1), c01.x.segment<2>(1),
                               c11.x.segment<2>(1), y, xi))
            break;
          const double eps = 1e-9;
          int da = xi[0] < -eps ? -1 : (xi[0] > 1 + eps ? 1 : 0);
          int db = xi[1] < -eps ? -1 : (xi[1] > 1 + eps ? 1 : 0);
          if (a + da < 0 || a + da > n2 - 2) da = 0;
          if (b + db < 0 || b + db > n3 - 2) db = 0;
          if (da == 0 && db == 0) {
            if (xi[0] < -1e-6 || xi[0] > 1 + 1e-6 || xi[1] < -1e-6 || xi[1] > 1 + 1e-6) break;
            const double s0 = std::clamp(xi[0], 0.0, 1.0), s1 = std::clamp(xi[1], 0.0, 1.0);
            w[p] = (1 - s0) * (1 - s1) * c00.value + s0 * (1 - s1) * c10.value +
                   (1 - s0) * s1 * c01.value + s0 * s1 * c11.value;
            found = true;
          }
          a += da;
          b += db;
        }
        if (!found) failures[i].push_back(p);
      }
    }
  });
  std::vector<Index> bad;
  for (const auto& f : failures) bad.insert(bad.end(), f.begin(), f.end());
  if (!bad.empty()) {
    std::ostringstream os;
    os << "inverse characteristic lookup failed at " << bad.size() << " node(s):";
    for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 20); ++k) os << ' ' << bad[k];
    throw TransportError(os.str());
  }
  return w;
}

}  // namespace nsf
