#pragma once

#include <cstddef>
#include <vector>

#include "hjsys/core.hpp"
#include "hjsys/error.hpp"
#include "hjsys/hamiltonian.hpp"

namespace hjsys {

// Scalar discounted equation  a v + H_i(x, Dv) = f_i(x)  on the torus, whose
// solution is the value function
//   v(x) = inf_gamma  int_{-inf}^0 e^{a s} (L_i(gamma, gamma') + f_i(gamma)) ds,  gamma(0) = x.
// For a system component, f_i(x) = -sum_{j != i} a_ij w_j(x) + beta.
// discount = 0 is accepted for the single-equation harness (m = 1), where the
// equation degenerates to the critical eikonal equation.
struct DiscountedProblem {
  std::size_t component_index = 0;
  double discount = 1.0;
  HamiltonianComponent hamiltonian;
  GridField source;
};

enum class UpdateScheme {
  // Plain Jacobi sweep of the semi-Lagrangian operator.
  Explicit,
  // Same operator, but the node's own weight in the interpolation stencil is
  // solved for exactly. Identical fixed point, faster propagation.
  LocallyImplicit,
};

struct SolverConfig {
  double dt = 0.05;
  double speed_bound = 3.0;       // velocity search box [-Q, Q]^dim
  int candidates_per_axis = 41;   // odd, so q = 0 is a candidate
  // Extra speeds +-dq / 2^j, j = 1..refinement_levels, per axis, where dq is
  // the uniform spacing. Resolves the slow approach to equilibria.
  int refinement_levels = 6;
  double fp_tolerance = 1e-9;     // sup-norm increment stop
  int max_iterations = 200000;
  UpdateScheme scheme = UpdateScheme::LocallyImplicit;

  // Throws InvalidArgument on non-positive values, an even candidate count,
  // or a search box that reaches half a period in one step.
  void check() const;
};

// Velocity grid over [-Q, Q]^dim in lexicographic order: a uniform axis
// refined geometrically around 0, tensorized in 2D.
std::vector<Vec> velocity_candidates(int dim, const SolverConfig& cfg);

// Exact discount weights: rho = e^{-a dt}, weight = (1 - rho) / a (dt when a = 0).
struct DiscountWeights {
  double rho;
  double weight;
};
DiscountWeights discount_weights(double discount, double dt);

// One Jacobi sweep of the semi-Lagrangian Bellman operator:
//   (T v)(x) = min_q  weight (L_i(x, q) + f_i(x)) + rho v(x - q dt)
// Monotone, and a sup-norm contraction with factor rho.
GridField bellman_update(const GridField& v, const DiscountedProblem& prob, const SolverConfig& cfg);

class MaxIterationsExceeded : public Error {
 public:
  MaxIterationsExceeded(int iterations, double last_increment);
  int iterations() const noexcept { return iterations_; }
  double last_increment() const noexcept { return last_increment_; }

 private:
  int iterations_;
  double last_increment_;
};

struct DiscountedSolution {
  GridField value;
  int iterations = 0;
  double last_increment = 0.0;
  // sup |T v - v| for the explicit operator at the returned field.
  double bellman_residual = 0.0;
};

// Iterates the Bellman operator from v0 until the sup-norm increment drops
// below cfg.fp_tolerance. Without v0 the iteration starts from f / a.
DiscountedSolution solve_discounted(const DiscountedProblem& prob, const SolverConfig& cfg);
DiscountedSolution solve_discounted(const DiscountedProblem& prob, const SolverConfig& cfg, GridField v0);

struct TrajectorySample {
  double t = 0.0;
  Vec point{0.0, 0.0};
  Vec velocity{0.0, 0.0};
  double cost = 0.0;  // discounted running cost accumulated before this sample
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double running_cost = 0.0;     // sum_k rho^k weight (L + f)(gamma_k, q_k)
  double start_value = 0.0;      // v(x0)
  double terminal_value = 0.0;   // v(gamma(-T))
  double terminal_discount = 1.0;  // e^{-a T}

  // |running_cost + e^{-aT} v(gamma(-T)) - v(x0)|
  double value_gap() const;
};

// Greedy backward-in-time policy: at each step the argmin velocity of the
// Bellman operator at the current point (ties go to the first candidate in
// lexicographic order within 1e-12). Steps floor(T / dt) times.
Trajectory extract_trajectory(const GridField& v, const DiscountedProblem& prob, const SolverConfig& cfg,
                              const Vec& x0, double horizon);

struct ComparisonReport {
  bool passed = true;
  double worst_gap = 0.0;  // max_x (sub - sol), may be negative
  NodeIndex worst_node = 0;
};

// Non-throwing comparison of sub against sol + tol.
ComparisonReport compare_fields(const GridField& sub, const GridField& sol, double tol);

class ComparisonViolated : public Error {
 public:
  explicit ComparisonViolated(ComparisonReport report);
  const ComparisonReport& report() const noexcept { return report_; }

 private:
  ComparisonReport report_;
};

// Asserts sub <= sol + tol nodewise; throws ComparisonViolated otherwise.
ComparisonReport comparison_check(const GridField& sub, const GridField& sol, double tol);

}  // namespace hjsys
