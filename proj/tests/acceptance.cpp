// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

#include "nsf/calibration.hpp"
#include "nsf/config.hpp"
#include "nsf/diagnostics.hpp"
#include "nsf/elliptic.hpp"
#include "nsf/parallel.hpp"
#include "nsf/picard.hpp"
#include "nsf/run.hpp"
#include "nsf/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace nsf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

RunConfig config(const std::string& name) { return load_config(std::string(NSF_CONFIG_DIR) + "/" + name); }

const std::vector<int> kResolutions{16, 32, 64};

Outcome background_exactness() {
  const RunConfig cfg = config("background_only.toml");
  const SolveOutcome out = solve_problem(cfg);
  const auto& rep = out.picard.report;

  const Grid grid(make_domain(cfg), cfg.resolution);
  const ProblemData data = build_problem_data(grid, cfg.params, cfg.data);
  PhysicalState exact;
  exact.v = VectorField::Zero(grid.size(), grid.dim());
  exact.v.col(0).setOnes();
  exact.rho = ScalarField::Ones(grid.size());
  exact.theta = ScalarField::Constant(grid.size(), cfg.params.T0);
  const MainSystemResidual r = residual_main_system(grid, exact, data, make_laws(cfg), cfg.params);
  const double res = std::max(r.pde_max(), r.bc_max());

  Outcome o;
  o.pass = rep.D0 == 0.0 && rep.converged && rep.steps.size() == 1 && out.weak_norm <= 1e-12 && res <= 1e-10;
  o.detail = "D0=" + fmt(rep.D0) + " steps=" + std::to_string(rep.steps.size()) +
             " |state|=" + fmt(out.weak_norm) + " residual=" + fmt(res) + " (<= 1e-10)";
  return o;
}

Outcome manufactured_convergence() {
  const RunConfig cfg = config("study.toml");
  const auto laws = make_laws(cfg);
  const StudyResult res =
      convergence_study(cfg.length, cfg.dim, cfg.params, linearization_constants(laws, cfg.params), kResolutions);
  Outcome o{true, ""};
  for (const char* name : {"neumann", "robin", "lame"}) {
    const double k = res.order(name);
    o.pass = o.pass && std::abs(k - 2.0) <= 0.3;
    o.detail += std::string(name) + "=" + fmt(k) + " ";
  }
  const double k = res.order("linear_step");
  o.pass = o.pass && k >= 0.9;
  o.detail += "linear_step=" + fmt(k) + " (2 +- 0.3; >= 0.9)";
  return o;
}

Outcome transport_oracle() {
  const RunConfig cfg = config("transport_oracle.toml");
  std::vector<double> hs, errs;
  for (int n : kResolutions) {
    const Grid grid(make_domain(cfg), study_resolution(n, cfg.length, cfg.dim));
    hs.push_back(grid.spacing(0));
    errs.push_back(transport_oracle_discrepancy(grid, kCalibrationSeed, 0.05));
  }
  const double order = fitted_order(hs, errs);
  const Grid coarse(make_domain(cfg), study_resolution(16, cfg.length, cfg.dim));
  const double logistic = logistic_characteristic_error(coarse, 0.1);
  bool decreasing = true;
  for (std::size_t k = 1; k < errs.size(); ++k) decreasing = decreasing && errs[k] < errs[k - 1];
  Outcome o;
  o.pass = decreasing && order >= 0.9 && logistic <= 1e-8;
  o.detail = "discrepancy " + fmt(errs.front()) + " -> " + fmt(errs.back()) + " order=" + fmt(order) +
             " (>= 0.9) logistic=" + fmt(logistic) + " (<= 1e-8)";
  return o;
}

Outcome contraction() {
  const RunConfig cfg = config("small_data.toml");
  const SolveOutcome out = solve_problem(cfg);
  const auto& rep = out.picard.report;
  const double qmax = rep.max_q(2);
  const double last = rep.steps.empty() ? INFINITY : rep.steps.back().delta;
  Outcome o;
  o.pass = rep.converged && qmax < 1.0 && last < 1e-10 && rep.steps.size() <= 50;
  o.detail = "steps=" + std::to_string(rep.steps.size()) + " max q_n(n>=2)=" + fmt(qmax) +
             " final delta=" + fmt(last) + " (< 1, < 1e-10, <= 50 steps)";
  return o;
}

Outcome linearity() {
  RunConfig cfg = config("small_data.toml");
  const double s = cfg.data.scale;
  const SolveOutcome full = solve_problem(cfg);
  cfg.data.scale = 0.5 * s;
  const SolveOutcome half = solve_problem(cfg);
  const double ratio = full.weak_norm / half.weak_norm;
  Outcome o;
  o.pass = full.picard.report.converged && half.picard.report.converged && std::abs(ratio / 2.0 - 1.0) <= 0.05;
  o.detail = "|state(s)|/|state(s/2)|=" + fmt(ratio) + " (2 within 5%)";
  return o;
}

Outcome uniqueness() {
  const RunConfig cfg = config("small_data.toml");
  const Grid grid(make_domain(cfg), cfg.resolution);
  const ProblemData data = build_problem_data(grid, cfg.params, cfg.data);
  const ProblemContext ctx(grid, cfg.params, make_laws(cfg), data, cfg.p);
  RandomFields rf(grid, kCalibrationSeed);
  const FlowState start = rf.smooth_state(0.1);
  const double dist = uniqueness_probe(ctx, FlowState::zero(grid), start, cfg.iteration);
  Outcome o;
  o.pass = dist <= 1e-8;
  o.detail = "weak distance=" + fmt(dist) + " (<= 1e-8)";
  return o;
}

Outcome estimate_suite() {
  const RunConfig cfg = config("verify.toml");
  const Grid grid(make_domain(cfg), cfg.resolution);
  const auto laws = make_laws(cfg);
  const LinearSystem sys(grid, cfg.params, linearization_constants(laws, cfg.params));
  const Calibration cal = calibrate(grid, sys);
  const auto verdicts = verify_inequalities(grid, sys, cal, cal.seed + 1);
  Outcome o{!verdicts.empty(), ""};
  for (const auto& v : verdicts) {
    o.pass = o.pass && v.pass && !v.outlier;
    if (!v.pass) o.detail += v.id + " FAILED ";
  }
  o.detail += std::to_string(verdicts.size()) + " checkers, worst ratio/C = ";
  double worst = 0.0;
  for (const auto& v : verdicts) worst = std::max(worst, v.ratio() / v.constant);
  o.detail += fmt(worst);
  return o;
}

Outcome transport_identity() {
  const RunConfig cfg = config("small_data.toml");
  std::vector<double> hs, nonlinear;
  const auto laws = make_laws(cfg);
  const auto lin = linearization_constants(laws, cfg.params);
  const StudyResult res = convergence_study(cfg.length, cfg.dim, cfg.params, lin, kResolutions);
  for (int n : kResolutions) {
    const Grid grid(make_domain(cfg), study_resolution(n, cfg.length, cfg.dim));
    const ProblemData data = build_problem_data(grid, cfg.params, cfg.data);
    const ProblemContext ctx(grid, cfg.params, laws, data, cfg.p);
    const PicardResult r = picard_iterate(FlowState::zero(grid), ctx, cfg.iteration);
    const HelmholtzProjector helm(grid);
    // At the fixed point the last linear step has the assembled data of the state itself.
    const LinearProblemData lp = assemble_FGH(r.state, ctx);
    hs.push_back(grid.spacing(0));
    nonlinear.push_back(trans_identity(ctx.system(), lp, r.state, helm).l2);
  }
  const double k_manufactured = res.order("trans_identity");
  // The lift of the normal-velocity datum has a layer of width comparable to the coarsest
  // spacing, so the fixed-point rate is read from the finest pair; the full fit is printed too.
  const double k_fixed_point = std::log(nonlinear[1] / nonlinear[2]) / std::log(hs[1] / hs[2]);
  Outcome o;
  o.pass = k_manufactured >= 0.9 && k_fixed_point >= 0.9;
  o.detail = "manufactured order=" + fmt(k_manufactured) + " fixed-point order=" + fmt(k_fixed_point) +
             " (fit over all grids " + fmt(fitted_order(hs, nonlinear)) + "; " + fmt(nonlinear.front()) +
             " -> " + fmt(nonlinear.back()) + ", >= 0.9)";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "nsf_acceptance_determinism";
  fs::remove_all(root);
  const std::string cfg = std::string(NSF_CONFIG_DIR) + "/small_data.toml";
  std::vector<std::string> summaries;
  for (const char* threads : {"1", "1", "4", "4"}) {
    const fs::path dir = root / ("run" + std::to_string(summaries.size()));
    const std::string cmd = std::string("NSF_THREADS=") + threads + " \"" + NSF_BINARY + "\" solve -q \"" + cfg +
                            "\" --out-dir \"" + dir.string() + "\"";
    if (std::system(cmd.c_str()) != 0) return {false, "solve run failed: " + cmd};
    summaries.push_back(slurp(dir / "summary.json"));
  }
  bool same = !summaries.front().empty();
  for (const auto& s : summaries) same = same && s == summaries.front();
  fs::remove_all(root);
  return {same, "4 runs (NSF_THREADS=1,1,4,4), summary.json " + std::string(same ? "byte-identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"background exactness", background_exactness},
      {"manufactured convergence", manufactured_convergence},
      {"transport oracle equivalence", transport_oracle},
      {"contraction", contraction},
      {"linearity of response", linearity},
      {"uniqueness probe", uniqueness},
      {"estimate suite", estimate_suite},
      {"transport identity", transport_identity},
      {"determinism", determinism},
  };
  int failed = 0;
  int id = 1;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s | %s | %.1fs\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
    ++id;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
