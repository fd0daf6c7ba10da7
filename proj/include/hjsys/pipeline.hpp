#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjsys/aubry.hpp"
#include "hjsys/critical.hpp"
#include "hjsys/discounted.hpp"
#include "hjsys/problem_file.hpp"
#include "json.hpp"

namespace hjsys {

inline constexpr int kReportSchemaVersion = 1;

struct PipelineOptions {
  std::optional<double> beta;  // overrides the file; skips estimate_beta
  std::optional<int> n;        // overrides grid.n
  std::uint64_t seed = 20240601;
  std::size_t probe_nodes = 20;
  std::size_t metric_pairs = 1000;
  double equilibrium_tol = 1e-6;
  double rigidity_tol = 0.02;
};

// Problem, solver configuration and the level used by the algorithm.
struct Setup {
  SystemProblem sys;
  SolverConfig cfg;
  AlgorithmOptions algo;
  std::optional<BetaEstimate> estimate;
  double beta = 0.0;
};

Setup prepare(const ProblemFile& pf, const PipelineOptions& opt);

// Runs the algorithm from the constant start.
AlgorithmHistory solve_primary(const Setup& s);

struct PipelineResult {
  Setup setup;
  EquilibriumList equilibria;
  AlgorithmHistory primary;                    // constant start
  std::optional<AlgorithmHistory> secondary;   // vanishing-discount start
  AubryEstimate aubry;
  IsolationReport isolation;
  std::optional<RigidityReport> rigidity;
  nlohmann::json report;
};

// validate -> beta -> two runs -> aubry -> eikonal cross-checks -> diagnostics.
PipelineResult run_pipeline(const ProblemFile& pf, const PipelineOptions& opt = {});

// report.json, solution.dat, initial.dat, history.dat, beta.dat, growth.dat,
// residual.dat and mask.dat under dir (created if missing).
void write_artifacts(const PipelineResult& res, const std::string& dir);

// Delimited field files: node coordinates, then one column per component.
void write_field_file(const std::string& path, const VectorField& v);
VectorField read_field_file(const std::string& path, const TorusGrid& grid, std::size_t m);

void write_trajectory_file(const std::string& path, const Trajectory& tr, int dim);

}  // namespace hjsys
