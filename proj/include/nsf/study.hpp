#pragma once

#include "nsf/constitutive.hpp"
#include "nsf/grid.hpp"
#include "nsf/picard.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace nsf {

/// One-dimensional factor with its first two derivatives.
struct Factor {
  std::function<double(double)> f, df, ddf;

  static Factor one();
  static Factor cosine(double k);  // cos(k x)
  static Factor sine(double k);    // sin(k x)
  /// x^2 (1 - x)^2 on [0, 1]: value and slope vanish at both ends.
  static Factor clamp01();
};

/// Sum of separable terms c * f0(x1) f1(x2) f2(x3) with exact derivatives.
class Separable {
 public:
  Separable& add(double coef, Factor f0, Factor f1, Factor f2 = Factor::one());

  double value(const Point& x) const;
  double d(const Point& x, int a) const;
  double dd(const Point& x, int a, int b) const;
  double laplacian(const Point& x, int dim) const;

  ScalarField sample(const Grid& grid) const;

 private:
  struct Term {
    double coef;
    std::array<Factor, 3> parts;
  };
  double eval(const Point& x, const std::array<int, 3>& order) const;
  std::vector<Term> terms_;
};

/// Analytic vector field with one separable function per component.
struct SeparableVector {
  std::vector<Separable> comp;

  VectorField sample(const Grid& grid) const;
  double div(const Point& x, int dim) const;
};

// Manufactured fields used by the convergence study and the tests.
Separable manufactured_neumann(double length);  // zero normal derivative on every face
/// Zero value and slope on the walls, zero slope on inflow and outflow.
Separable manufactured_temperature(double length, int dim);
SeparableVector manufactured_velocity(double length, int dim);  // n.u = 0 on every face
Separable manufactured_density(double length);
SeparableVector manufactured_transport_velocity(double length, int dim, double amplitude);

/// Linear-system data generated by an analytic triple.
LinearProblemData manufactured_linear_data(const LinearSystem& sys, const SeparableVector& u,
                                           const Separable& sigma, const Separable& eta,
                                           const SeparableVector& U);

struct StudyRow {
  std::string problem;
  std::vector<int> resolution;
  double h = 0.0;
  double error = 0.0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<std::pair<std::string, double>> orders;  // fitted log-log slopes

  double order(const std::string& problem) const;
  std::string csv() const;
};

/// Least-squares slope of log(error) against log(h).
double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

/// Grid with n cells along the channel and round(n / l) across (per axis).
std::vector<int> study_resolution(int n, double length, int dim);

/// Manufactured Neumann, Robin temperature, Lame slip, transport and coupled linear step problems.
StudyResult convergence_study(double length, int dim, const PhysicalParams& pp,
                              const LinearizationConstants& lin, const std::vector<int>& ns);

}  // namespace nsf
