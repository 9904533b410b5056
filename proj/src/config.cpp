#include "nsf/config.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace nsf {

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::Solve: return "solve";
    case RunMode::VerifyInequalities: return "verify-inequalities";
    case RunMode::TransportOracle: return "transport-oracle";
    case RunMode::ConvergenceStudy: return "convergence-study";
  }
  return "solve";
}

RunMode parse_mode(const std::string& s) {
  for (RunMode m : {RunMode::Solve, RunMode::VerifyInequalities, RunMode::TransportOracle,
                    RunMode::ConvergenceStudy})
    if (s == mode_name(m)) return m;
  throw ConfigError("unknown mode '" + s + "'");
}

namespace {

double number(const toml::table& t, const char* section, const char* key, double fallback) {
  const auto node = t[section][key];
  if (!node) return fallback;
  if (auto v = node.value<double>()) return *v;
  throw ConfigError(std::string(section) + "." + key + " must be a number");
}

std::string text(const toml::table& t, const char* section, const char* key, const std::string& fallback) {
  const auto node = t[section][key];
  if (!node) return fallback;
  if (auto v = node.value<std::string>()) return *v;
  throw ConfigError(std::string(section) + "." + key + " must be a string");
}

std::vector<int> int_list(const toml::table& t, const char* section, const char* key,
                          const std::vector<int>& fallback) {
  const auto node = t[section][key];
  if (!node) return fallback;
  const toml::array* arr = node.as_array();
  if (!arr) throw ConfigError(std::string(section) + "." + key + " must be an array of integers");
  std::vector<int> out;
  for (const auto& e : *arr) {
    auto v = e.value<std::int64_t>();
    if (!v) throw ConfigError(std::string(section) + "." + key + " must be an array of integers");
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

Profile profile(const toml::table& t, const char* key, const std::string& base_dir) {
  const std::string s = text(t, "data", key, "zero");
  try {
    Profile pr = parse_profile(s);
    if (pr.kind == "csv" && std::filesystem::path(pr.csv_path).is_relative())
      pr.csv_path = (std::filesystem::path(base_dir) / pr.csv_path).string();
    return pr;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("data.") + key + ": " + e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& src, const std::string& base_dir) {
  toml::table t;
  try {
    t = toml::parse(src);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML parse error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }
  RunConfig c;
  if (auto m = t["mode"].value<std::string>()) c.mode = parse_mode(*m);

  c.length = number(t, "domain", "length", c.length);
  c.dim = static_cast<int>(number(t, "domain", "dim", c.dim));
  c.resolution = int_list(t, "grid", "resolution", c.resolution);

  auto& pp = c.params;
  pp.mu = number(t, "params", "mu", pp.mu);
  pp.lambda = number(t, "params", "lambda", pp.lambda);
  pp.kappa = number(t, "params", "kappa", pp.kappa);
  pp.alpha = number(t, "params", "alpha", pp.alpha);
  pp.L_wall = number(t, "params", "L_wall", pp.L_wall);
  pp.T0 = number(t, "params", "T0", pp.T0);

  c.pressure_law = text(t, "pressure", "law", c.pressure_law);
  c.p0 = number(t, "pressure", "p0", c.p0);
  c.virial_b = number(t, "pressure", "b", c.virial_b);

  c.data.scale = number(t, "data", "scale", c.data.scale);
  c.data.f = profile(t, "f", base_dir);
  c.data.b = profile(t, "b", base_dir);
  c.data.d = profile(t, "d", base_dir);
  c.data.rho_in = profile(t, "rho_in", base_dir);
  c.data.g = profile(t, "g", base_dir);
  c.data.T1 = profile(t, "T1", base_dir);

  auto& it = c.iteration;
  it.tol = number(t, "iteration", "tol", it.tol);
  it.max_iter = static_cast<int>(number(t, "iteration", "max_iter", it.max_iter));
  it.inner.tol = number(t, "iteration", "inner_tol", it.inner.tol);
  it.inner.max_sweeps = static_cast<int>(number(t, "iteration", "max_sweeps", it.inner.max_sweeps));
  it.rho_min = number(t, "iteration", "rho_min", it.rho_min);
  c.p = number(t, "iteration", "p", c.p);
  c.seed = static_cast<std::uint64_t>(number(t, "iteration", "seed", static_cast<double>(c.seed)));

  c.study_resolutions = int_list(t, "study", "resolutions", c.study_resolutions);
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

void validate_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(c.length > 0.0, "domain.length must be positive");
  require(c.dim == 2 || c.dim == 3, "domain.dim must be 2 or 3");
  require(static_cast<int>(c.resolution.size()) == c.dim, "grid.resolution needs one entry per axis");
  for (int n : c.resolution) require(n >= 4, "grid.resolution entries must be at least 4");
  const auto& pp = c.params;
  require(pp.mu > 0.0, "params.mu must be positive");
  require(pp.lambda >= 0.0, "params.lambda must be non-negative");
  require(pp.kappa > 0.0, "params.kappa must be positive");
  require(pp.alpha > 0.0, "params.alpha must be positive");
  require(pp.L_wall >= 0.0, "params.L_wall must be non-negative");
  require(pp.T0 > 0.0, "params.T0 must be positive");
  require(c.p0 > 0.0, "pressure.p0 must be positive");
  require(c.pressure_law == "ideal" || c.pressure_law == "virial", "pressure.law must be 'ideal' or 'virial'");
  require(c.p > 3.0, "iteration.p must exceed 3");
  require(c.iteration.tol > 0.0 && c.iteration.inner.tol > 0.0, "tolerances must be positive");
  require(c.iteration.max_iter >= 1 && c.iteration.inner.max_sweeps >= 1, "iteration limits must be positive");
  require(c.data.scale >= 0.0, "data.scale must be non-negative");
  if (c.mode == RunMode::ConvergenceStudy)
    require(c.study_resolutions.size() >= 3, "study.resolutions needs at least 3 entries");
}

ConstitutiveLaws make_laws(const RunConfig& c) {
  try {
    if (c.pressure_law == "virial") return virial_gas(c.p0, c.params.T0, c.virial_b);
    return ideal_gas_defaults(c.p0, c.params.T0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ChannelDomain make_domain(const RunConfig& c) { return ChannelDomain(c.length, c.dim); }

}  // namespace nsf
