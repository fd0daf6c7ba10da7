#pragma once

#include <cstddef>
#include <vector>

#include "hjsys/core.hpp"
#include "hjsys/critical.hpp"
#include "hjsys/error.hpp"

namespace hjsys {

// Nodes where o . min_p H(x, .) = beta, within a tolerance.
struct EquilibriumList {
  std::vector<NodeIndex> nodes;
  std::vector<double> values;  // o . min_p H at each listed node
  double tolerance = 0.0;

  bool contains(NodeIndex node) const;
};

EquilibriumList detect_equilibria(const SystemProblem& sys, double beta, double tol = 1e-6);

enum class AubryMethod { Pinning, Equilibria, Union };

const char* to_string(AubryMethod method);

// Superset estimate of the Aubry set on the grid.
struct AubryEstimate {
  std::vector<char> mask;  // one flag per node
  AubryMethod method = AubryMethod::Union;
  GridField slack;         // min over components of V - v_0
  double pin_tol = 0.0;

  std::vector<NodeIndex> nodes() const;
  std::size_t count() const;
};

// Nodes where every component of the limit stays within pin_tol of v_0,
// united with the equilibria. Throws InvalidArgument if hist has no limit.
AubryEstimate estimate_from_pinning(const AlgorithmHistory& hist, double pin_tol, const EquilibriumList& eq);

struct IsolationReport {
  std::vector<std::vector<NodeIndex>> components;  // connected mask components (axis neighbors, periodic)
  std::vector<NodeIndex> isolated;                 // single-node components
  std::vector<NodeIndex> warnings;                 // isolated nodes that are not equilibria
  bool passed() const noexcept { return warnings.empty(); }
};

IsolationReport classify_isolated(const AubryEstimate& est, const EquilibriumList& eq, const TorusGrid& grid);

struct RigidityReport {
  double k = 0.0;               // mean of u - v over mask nodes and components
  double worst_deviation = 0.0;  // max |u_i(y) - v_i(y) - k|
  NodeIndex worst_node = 0;
  std::size_t worst_component = 0;
  std::size_t mask_nodes = 0;
  bool passed = true;
};

class RigidityViolated : public Error {
 public:
  explicit RigidityViolated(RigidityReport report);
  const RigidityReport& report() const noexcept { return report_; }

 private:
  RigidityReport report_;
};

// Non-throwing comparison of u - v against k 1 on the mask.
RigidityReport rigidity_report(const VectorField& u, const VectorField& v, const AubryEstimate& est, double tol);
// Same, throwing RigidityViolated on failure.
RigidityReport rigidity_check(const VectorField& u, const VectorField& v, const AubryEstimate& est, double tol);

}  // namespace hjsys
