#pragma once

#include <vector>

#include "hjsys/core.hpp"

namespace hjsys {

// Largest one-sided difference quotient over all nodes and axes.
struct LipschitzEstimate {
  double value = 0.0;
};

LipschitzEstimate lipschitz_estimate(const GridField& field);

// Shell test for a nonempty superdifferential at a node. The slope p is a
// least-squares fit over the shell of the smallest radius and then held
// fixed; eps(r) = max over shell nodes y of [u(y) - u(x) - p.(y - x)]^+.
// The shell has 2 points in 1D and 8 (axis and diagonal) in 2D.
struct SuperdiffEntry {
  NodeIndex node = 0;
  Vec slope{0.0, 0.0};
  std::vector<double> radii;    // physical radii
  std::vector<double> eps;      // eps(r) per radius
  double exponent = 0.0;        // log-log slope of eps against r; +inf when eps vanishes
  double ratio = 0.0;           // eps(r_min) / r_min / lipschitz
  bool passed = false;          // exponent >= 1.2 or ratio <= 0.05
};

struct SuperdiffReport {
  std::vector<SuperdiffEntry> entries;
  std::size_t passes() const;
  bool all_passed() const { return passes() == entries.size(); }
};

inline constexpr double kSuperdiffExponent = 1.2;
inline constexpr double kSuperdiffRatio = 0.05;
// eps below this is rounding noise and counts as exactly zero.
inline constexpr double kSuperdiffFloor = 1e-14;

// radii_cells are multiples of h, increasing; {1, 2, 4} by default.
// lipschitz <= 0 means "estimate from the field".
SuperdiffEntry superdifferential_probe(const GridField& field, NodeIndex node,
                                       const std::vector<int>& radii_cells = {1, 2, 4}, double lipschitz = 0.0);

SuperdiffReport superdifferential_probe(const GridField& field, const std::vector<NodeIndex>& nodes,
                                        const std::vector<int>& radii_cells = {1, 2, 4});

struct StrictDiffReport {
  NodeIndex node = 0;
  Vec forward{0.0, 0.0};
  Vec backward{0.0, 0.0};
  double tolerance = 0.0;      // 5 h lipschitz
  double worst_jump = 0.0;     // max per-axis |forward - backward| at the node and its axis neighbors
  bool at_node = false;
  bool at_neighbors = false;
  bool passed() const noexcept { return at_node && at_neighbors; }
};

StrictDiffReport strict_differentiability_probe(const GridField& field, NodeIndex node, double lipschitz = 0.0);

}  // namespace hjsys
