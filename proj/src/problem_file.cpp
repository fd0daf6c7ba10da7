#include "hjsys/problem_file.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

namespace hjsys {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, "cli", (path.empty() ? std::string("<root>") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) fail(join(path, item.key()), "unknown key");
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(join(path, key), "missing required key");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::optional<double> number_or_auto(const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() != "auto") fail(path, "expected a number or \"auto\"");
    return std::nullopt;
  }
  return number(j, path);
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], index(path, i)));
  return out;
}

TrigPotential parse_potential(const json& j, const std::string& path, int dim) {
  expect_object(j, path, {"constant", "modes"});
  const double c = j.contains("constant") ? number(j["constant"], join(path, "constant")) : 0.0;
  std::vector<TrigMode> modes;
  if (j.contains("modes")) {
    const std::string mp = join(path, "modes");
    const json& arr = j["modes"];
    if (!arr.is_array()) fail(mp, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = index(mp, i);
      expect_object(arr[i], p, {"wavevector", "amplitude", "phase"});
      const std::string wp = join(p, "wavevector");
      const json& wv = require(arr[i], p, "wavevector");
      if (!wv.is_array() || static_cast<int>(wv.size()) != dim) {
        fail(wp, "expected " + std::to_string(dim) + " integer entries");
      }
      TrigMode m;
      for (int k = 0; k < dim; ++k) m.wavevector[k] = integer(wv[k], index(wp, k));
      m.amplitude = number(require(arr[i], p, "amplitude"), join(p, "amplitude"));
      m.phase = arr[i].contains("phase") ? number(arr[i]["phase"], join(p, "phase")) : 0.0;
      modes.push_back(m);
    }
  }
  return TrigPotential(c, std::move(modes));
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("", std::string("malformed document: ") + e.what());
  }

  ProblemFile pf;
  expect_object(doc, "", {"grid", "components", "coupling", "solver", "algorithm"});

  const json& grid = require(doc, "", "grid");
  expect_object(grid, "grid", {"dim", "n"});
  pf.dim = integer(require(grid, "grid", "dim"), "grid.dim");
  pf.n = integer(require(grid, "grid", "n"), "grid.n");
  if (pf.dim != 1 && pf.dim != 2) fail("grid.dim", "must be 1 or 2");
  if (pf.n < 8) fail("grid.n", "must be at least 8");

  const json& comps = require(doc, "", "components");
  if (!comps.is_array() || comps.empty()) fail("components", "expected a non-empty array");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string p = index("components", i);
    expect_object(comps[i], p, {"kinetic_scale", "potential"});
    const double c0 = comps[i].contains("kinetic_scale") ? number(comps[i]["kinetic_scale"], join(p, "kinetic_scale"))
                                                         : 1.0;
    if (!(c0 > 0.0)) fail(join(p, "kinetic_scale"), "must be positive");
    auto pot = parse_potential(require(comps[i], p, "potential"), join(p, "potential"), pf.dim);
    pf.components.emplace_back(c0, std::move(pot));
  }

  const json& a = require(doc, "", "coupling");
  if (!a.is_array()) fail("coupling", "expected an array of rows");
  for (std::size_t i = 0; i < a.size(); ++i) pf.coupling.push_back(numbers(a[i], index("coupling", i)));

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    expect_object(s, "solver", {"dt", "speed_bound", "candidates_per_axis", "fp_tolerance", "max_iterations"});
    if (s.contains("dt")) pf.dt = number_or_auto(s["dt"], "solver.dt");
    if (s.contains("speed_bound")) pf.speed_bound = number_or_auto(s["speed_bound"], "solver.speed_bound");
    if (s.contains("candidates_per_axis")) {
      pf.candidates_per_axis = integer(s["candidates_per_axis"], "solver.candidates_per_axis");
    }
    if (s.contains("fp_tolerance")) pf.fp_tolerance = number(s["fp_tolerance"], "solver.fp_tolerance");
    if (s.contains("max_iterations")) pf.max_iterations = integer(s["max_iterations"], "solver.max_iterations");
  }
  if (doc.contains("algorithm")) {
    const json& s = doc["algorithm"];
    expect_object(s, "algorithm", {"stop_tol", "max_sweeps", "beta", "deltas"});
    if (s.contains("stop_tol")) pf.stop_tol = number(s["stop_tol"], "algorithm.stop_tol");
    if (s.contains("max_sweeps")) pf.max_sweeps = integer(s["max_sweeps"], "algorithm.max_sweeps");
    if (s.contains("beta")) pf.beta = number_or_auto(s["beta"], "algorithm.beta");
    if (s.contains("deltas")) pf.deltas = numbers(s["deltas"], "algorithm.deltas");
  }
  return pf;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cli", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

SystemProblem build_system(const ProblemFile& pf, std::optional<int> n_override) {
  auto coupling = CouplingMatrix::validate(pf.coupling);
  return SystemProblem(TorusGrid(pf.dim, n_override.value_or(pf.n)), pf.components, std::move(coupling));
}

SolverConfig build_solver_config(const ProblemFile& pf, const SystemProblem& sys) {
  SolverConfig cfg;
  cfg.dt = pf.dt.value_or(auto_time_step(sys.grid()));
  cfg.speed_bound = pf.speed_bound.value_or(auto_speed_bound(sys));
  cfg.candidates_per_axis = pf.candidates_per_axis;
  cfg.fp_tolerance = pf.fp_tolerance;
  cfg.max_iterations = pf.max_iterations;
  cfg.check();
  return cfg;
}

}  // namespace hjsys
