#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hjsys/critical.hpp"
#include "hjsys/discounted.hpp"
#include "hjsys/hamiltonian.hpp"

namespace hjsys {

// In-memory form of a problem document. Optional numbers hold "auto" as
// nullopt. The JSON schema is documented in the README.
struct ProblemFile {
  int dim = 1;
  int n = 256;
  std::vector<HamiltonianComponent> components;
  std::vector<std::vector<double>> coupling;

  std::optional<double> dt;           // auto: h / 2
  std::optional<double> speed_bound;  // auto: auto_speed_bound
  int candidates_per_axis = 41;
  double fp_tolerance = 1e-9;
  int max_iterations = 200000;

  double stop_tol = 1e-6;
  int max_sweeps = 500;
  std::optional<double> beta;  // auto: estimate_beta
  std::vector<double> deltas{0.1, 0.05, 0.025};
};

// Strict parsing: unknown keys, missing required keys and wrong types raise
// Error{ParseError} naming the JSON path, e.g. "components[0].potential".
ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::string& path);

// Builds and validates the system (coupling axioms, equilibrium distribution).
// n_override replaces the grid size.
SystemProblem build_system(const ProblemFile& pf, std::optional<int> n_override = std::nullopt);
SolverConfig build_solver_config(const ProblemFile& pf, const SystemProblem& sys);

}  // namespace hjsys
