#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "hjsys/core.hpp"
#include "hjsys/critical.hpp"
#include "hjsys/error.hpp"
#include "hjsys/hamiltonian.hpp"

namespace hjsys {

// H^u(x, p) = H_i(x, p) + shift(x), with shift = (A u)_i frozen from a system field.
struct EffectiveHamiltonian {
  HamiltonianComponent base;
  GridField shift;

  // min_p H^u(x, .) at a node.
  double min_over_p(NodeIndex node) const { return base.min_over_p(shift.grid().coords(node)) + shift[node]; }
};

EffectiveHamiltonian effective_hamiltonian(const SystemProblem& sys, std::size_t i, const VectorField& u);
// Scalar Hamiltonian with zero shift.
EffectiveHamiltonian effective_hamiltonian(const HamiltonianComponent& base, const TorusGrid& grid);

// Directed graph discretizing the intrinsic semidistance
//   S_a(y, x) = inf { int sigma_a(gamma, gamma') : gamma from y to x }.
// Edges join axis neighbors (and diagonals in 2D); the cost of y -> x is
// |x - y| times the mean of sigma_a(., e) at both endpoints, e = (x - y)/|x - y|.
class IntrinsicMetricGraph {
 public:
  struct Edge {
    NodeIndex to;
    double cost;  // +inf when an endpoint has an empty sublevel
  };

  IntrinsicMetricGraph(const EffectiveHamiltonian& eff, double level);

  const TorusGrid& grid() const noexcept { return grid_; }
  double level() const noexcept { return level_; }
  std::size_t degree() const noexcept { return offsets_.size(); }
  // Out-edges of a node, in a fixed neighbor order.
  const Edge* edges(NodeIndex node) const noexcept { return &edges_[node * offsets_.size()]; }
  // Nodes whose sublevel {p : H^u(x, p) <= level} is empty.
  const std::vector<NodeIndex>& infeasible() const noexcept { return infeasible_; }

  // sigma_a(x, q) at a node.
  double support(NodeIndex node, const Vec& q) const;

 private:
  TorusGrid grid_;
  double level_;
  HamiltonianComponent base_;
  std::vector<double> slack_;  // level - min_p H^u, clamped at 0 when feasible
  std::vector<std::array<int, 2>> offsets_;
  std::vector<Edge> edges_;
  std::vector<NodeIndex> infeasible_;
};

// Sublevels this far below empty still count as a point.
inline constexpr double kFeasibilityTolerance = 1e-6;

// Single-source shortest paths: returns x -> S_a(source, x).
// Throws Error{InfeasibleLevel}.
GridField intrinsic_distance(const IntrinsicMetricGraph& metric, NodeIndex source);

// max over nodes of min_p H^u, the critical value of a mechanical Hamiltonian.
double scalar_critical_value(const EffectiveHamiltonian& eff);

// Nodes where min_p H^u lies within tol of c.
std::vector<NodeIndex> scalar_aubry(const EffectiveHamiltonian& eff, double c, double tol);

class IncompatibleTrace : public Error {
 public:
  IncompatibleTrace(NodeIndex from, NodeIndex to, double gap);
  // trace(to) - trace(from) exceeds S(from, to) by gap.
  NodeIndex from() const noexcept { return from_; }
  NodeIndex to() const noexcept { return to_; }
  double gap() const noexcept { return gap_; }

 private:
  NodeIndex from_;
  NodeIndex to_;
  double gap_;
};

// u(x) = min_y trace(y) + S(y, x) over trace nodes y, by multi-source
// shortest paths. Throws IncompatibleTrace when the trace is not
// 1-Lipschitz for S, and Error{InfeasibleLevel}.
GridField maximal_subsolution(const IntrinsicMetricGraph& metric, const std::vector<NodeIndex>& trace_nodes,
                              const std::vector<double>& trace_values, double tol = 1e-9);

struct MetricViolation {
  NodeIndex from;
  NodeIndex to;
  double gap;  // u(to) - u(from) - S(from, to)
};

struct MetricCheckReport {
  std::size_t edges_checked = 0;
  std::size_t pairs_checked = 0;
  std::size_t edge_violations = 0;
  std::size_t pair_violations = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  std::vector<MetricViolation> violations;  // first few, for reporting
  std::uint64_t seed = 0;
  bool passed() const noexcept { return edge_violations == 0 && pair_violations == 0; }
};

// u(x) - u(y) <= S_a(y, x) + tol. Every graph edge is checked, which on the
// graph is equivalent to checking every pair; sample_pairs random pairs are
// then checked against full shortest-path distances as an independent audit.
MetricCheckReport metric_subsolution_check(const GridField& u, const IntrinsicMetricGraph& metric,
                                           std::size_t sample_pairs, std::uint64_t seed = 20240601,
                                           double tol = 1e-9);

}  // namespace hjsys
