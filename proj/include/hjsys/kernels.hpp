#pragma once

// Node-parallel kernels of the semi-Lagrangian solver. Every kernel has an
// OpenMP driver and a plain serial reference; the two must agree to rounding.

#include <array>
#include <vector>

#include "hjsys/discounted.hpp"

namespace hjsys::kernels {

// Interpolation stencil of one velocity candidate. The foot point x - q dt is
// displaced by the same number of cells from every node, so offsets and
// weights are shared by the whole grid.
struct Stencil {
  Vec velocity{0.0, 0.0};
  double kinetic = 0.0;  // |q|^2 / (2 c0)
  std::array<std::array<int, 2>, 4> offset{};
  std::array<double, 4> weight{};
  int count = 0;
  int self_slot = -1;  // entry pointing back at the node itself, if any
};

class BellmanKernel {
 public:
  BellmanKernel(const DiscountedProblem& prob, const SolverConfig& cfg);

  // Explicit Jacobi sweep, parallel over nodes.
  void apply(const GridField& v, GridField& out) const;
  // Locally implicit Jacobi sweep, parallel over nodes.
  void apply_implicit(const GridField& v, GridField& out) const;

  // Serial drivers of the same node updates.
  void apply_serial(const GridField& v, GridField& out) const;
  void apply_implicit_serial(const GridField& v, GridField& out) const;

  struct Choice {
    double value;
    std::size_t candidate;
  };
  // Bellman minimization at an arbitrary point; f is interpolated from the
  // source field and L evaluated exactly.
  Choice argmin_at(const GridField& v, const Vec& y) const;

  // Re-reads prob.source after the caller changed it in place.
  void refresh_source();

  const std::vector<Stencil>& stencils() const noexcept { return stencils_; }
  DiscountWeights weights() const noexcept { return w_; }

 private:
  double node_explicit(const GridField& v, NodeIndex node) const;
  double node_implicit(const GridField& v, NodeIndex node) const;

  const DiscountedProblem* prob_;
  SolverConfig cfg_;
  DiscountWeights w_;
  std::vector<Stencil> stencils_;
  std::vector<double> potential_;  // V(x) per node
  std::vector<double> running_;    // f(x) - V(x) per node
};

// Naive transcription of the operator, one node at a time, with generic
// interpolation and Lagrangian calls. Reference for the kernels above.
GridField bellman_update_reference(const GridField& v, const DiscountedProblem& prob, const SolverConfig& cfg);

// sup-norm of a - b, parallel reduction.
double sup_increment(const GridField& a, const GridField& b);

int thread_count();

}  // namespace hjsys::kernels
