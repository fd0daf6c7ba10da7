#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hjsys/core.hpp"
#include "hjsys/coupling.hpp"
#include "hjsys/discounted.hpp"
#include "hjsys/error.hpp"
#include "hjsys/hamiltonian.hpp"

namespace hjsys {

// Weakly coupled system  H_i(x, Du_i) + (A u)_i = beta,  i = 1..m,  on a torus grid.
class SystemProblem {
 public:
  // Throws InvalidArgument when the component count differs from the coupling size.
  SystemProblem(TorusGrid grid, std::vector<HamiltonianComponent> components, CouplingMatrix coupling);

  std::size_t m() const noexcept { return components_.size(); }
  const TorusGrid& grid() const noexcept { return grid_; }
  const std::vector<HamiltonianComponent>& components() const noexcept { return components_; }
  const HamiltonianComponent& component(std::size_t i) const noexcept { return components_[i]; }
  const CouplingMatrix& coupling() const noexcept { return coupling_; }
  const EquilibriumDistribution& distribution() const noexcept { return o_; }

  // min_p H_i(x, .) = V_i sampled at the nodes.
  const GridField& potential(std::size_t i) const noexcept { return potentials_[i]; }

  // max over nodes of o . min_p H(x, .), a lower bound for beta.
  double equilibrium_level() const;
  // o . (max_x V_1, ..., max_x V_m), the level of the best constant subsolution.
  double constant_level() const;

 private:
  TorusGrid grid_;
  std::vector<HamiltonianComponent> components_;
  CouplingMatrix coupling_;
  EquilibriumDistribution o_;
  std::vector<GridField> potentials_;
};

// Speed box covering every optimal velocity at the levels of interest:
// 1.5 sqrt(2 c0 (constant_level - min V)), at least 1.
double auto_speed_bound(const SystemProblem& sys);
// dt = h / 2. The time-discretization bias of the scheme is O(dt), so dt must
// shrink with h for the residual to converge at first order.
double auto_time_step(const TorusGrid& grid);

// Scalar problem of component k with every other component frozen at u:
//   (a_kk + extra_discount) v + H_k(x, Dv) = beta - sum_{j != k} a_kj u_j(x)
DiscountedProblem component_problem(const SystemProblem& sys, std::size_t k, const VectorField& u, double beta,
                                    double extra_discount = 0.0);

// Fully discounted system  delta u_i + H_i(x, Du_i) + (A u)_i = 0  solved by
// Gauss-Seidel over components, each pass making one locally implicit
// update per component. Throws Error{NoConvergence}.
struct DiscountedSystemSolution {
  VectorField u;
  int passes = 0;
  double last_increment = 0.0;
};
DiscountedSystemSolution solve_discounted_system(const SystemProblem& sys, const SolverConfig& cfg, double delta,
                                                 std::optional<VectorField> start = std::nullopt);

struct BetaEstimate {
  std::vector<double> deltas;
  std::vector<double> per_delta;  // -delta o . u_delta(x_ref)
  std::vector<int> passes;
  double extrapolated = 0.0;       // polynomial extrapolation of per_delta to delta = 0
  double lower_bound = 0.0;        // SystemProblem::equilibrium_level
  double upper_bound = 0.0;        // SystemProblem::constant_level
  // True when some node maximizes every V_i at once. Then the lower and upper
  // bounds coincide and equal the critical value of the discrete scheme.
  bool equilibrium_certified = false;
  // Level handed to the algorithm: the certified bound when available, else
  // the extrapolated value clamped into [lower_bound, upper_bound].
  double value = 0.0;
  NodeIndex reference_node = 0;
};

struct BetaOptions {
  std::vector<double> deltas{0.1, 0.05, 0.025};
  double lower_bound_tol = 0.05;
};

// Vanishing-discount estimate. Throws Error{NoConvergence | LowerBoundViolated | InvalidArgument}.
BetaEstimate estimate_beta(const SystemProblem& sys, const SolverConfig& cfg, const BetaOptions& opt = {});

enum class InitialGuess {
  VanishingDiscount,  // u_delta at the given delta, recentered at the reference node
  Constant,           // c with (A c)_i = beta - max V_i - o.(beta - max V)
};

struct SubsolutionOptions {
  InitialGuess guess = InitialGuess::VanishingDiscount;
  double delta = 0.025;
  double slack_tol = 0.02;       // upwind finite-difference slack allowed
  double projection_tol = 1e-12;  // stop when a projection pass lowers nothing by more
  int max_passes = 1000000;
};

// Discrete subsolution at level beta: the guess is projected onto
// { w : w_k <= T_k[w](w_k) for all k } by w_k <- min(w_k, T_k[w](w_k)),
// Gauss-Seidel over components, until nothing moves. The result is then
// checked against slack_tol with upwind differences; a vanishing-discount
// guess that misses it is blended with the projected constant, halving its
// weight up to six times.
// Throws Error{SubsolutionConstructionFailed}.
VectorField initial_subsolution(const SystemProblem& sys, double beta, const SolverConfig& cfg,
                                const SubsolutionOptions& opt = {});

// max over nodes and components of w_k - T_k[w](w_k) for the explicit operator
// (<= 0 for a discrete subsolution).
double subsolution_defect(const VectorField& w, const SystemProblem& sys, double beta, const SolverConfig& cfg);

struct SweepStats {
  std::vector<int> inner_iterations;  // per component
};

// One Gauss-Seidel sweep: for k = 1..m, solve the discounted problem of
// component k with j < k taken from the new iterate and j > k from v_prev.
// Each solve is warm-started from v_prev's component.
VectorField sweep(const VectorField& v_prev, const SystemProblem& sys, double beta, const SolverConfig& cfg,
                  SweepStats* stats = nullptr);

struct ResidualReport {
  std::vector<GridField> upwind;    // |H_i(x, p_up) + (AV)_i - beta|
  std::vector<GridField> forward;   // signed, forward differences on every axis
  std::vector<GridField> backward;  // signed, backward differences on every axis
  std::vector<double> max_per_component;
  double solution_residual = 0.0;
  double max_signed_upwind = 0.0;   // max of H_i(x, p_up) + (AV)_i - beta, the subsolution slack
};

// Upwind gradient: per axis the one-sided difference giving the larger
// Hamiltonian value (the larger magnitude for the quadratic family).
ResidualReport residual(const VectorField& v, const SystemProblem& sys, double beta);

struct AlgorithmOptions {
  double stop_tol = 1e-6;
  int max_sweeps = 500;
  bool keep_iterates = true;
};

struct AlgorithmHistory {
  std::vector<VectorField> iterates;  // v_0, v_1, ... (only v_0 and the last when keep_iterates is off)
  std::vector<double> increments;     // sup |v_{n+1} - v_n|
  std::vector<double> min_steps;      // min over nodes, components of v_{n+1} - v_n
  std::vector<int> inner_iterations;  // total inner solver iterations per sweep
  double beta_used = 0.0;
  bool converged = false;
  std::optional<VectorField> limit;
  std::optional<ResidualReport> residual;

  const VectorField& initial() const { return iterates.front(); }
  const VectorField& last() const { return iterates.back(); }
  // min over every recorded step (+inf before the first sweep).
  double monotonicity_worst() const;
  std::size_t sweeps() const noexcept { return increments.size(); }
};

class NotConverged : public Error {
 public:
  explicit NotConverged(AlgorithmHistory history);
  const AlgorithmHistory& history() const noexcept { return history_; }

 private:
  AlgorithmHistory history_;
};

// Iterates sweep from w0 until the sup-norm increment drops below stop_tol.
// Throws NotConverged with the recorded history after max_sweeps.
AlgorithmHistory run_algorithm(const SystemProblem& sys, double beta, const VectorField& w0, const SolverConfig& cfg,
                               const AlgorithmOptions& opt = {});

}  // namespace hjsys
