#include "hjsys/aubry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjsys {

bool EquilibriumList::contains(NodeIndex node) const {
  return std::find(nodes.begin(), nodes.end(), node) != nodes.end();
}

EquilibriumList detect_equilibria(const SystemProblem& sys, double beta, double tol) {
  EquilibriumList eq;
  eq.tolerance = tol;
  const auto& o = sys.distribution().o;
  for (NodeIndex x = 0; x < sys.grid().size(); ++x) {
    double s = 0.0;
    for (std::size_t i = 0; i < sys.m(); ++i) s += o[i] * sys.potential(i)[x];
    if (std::fabs(s - beta) <= tol) {
      eq.nodes.push_back(x);
      eq.values.push_back(s);
    }
  }
  return eq;
}

const char* to_string(AubryMethod method) {
  switch (method) {
    case AubryMethod::Pinning: return "pinning";
    case AubryMethod::Equilibria: return "equilibria";
    case AubryMethod::Union: return "union";
  }
  return "unknown";
}

std::vector<NodeIndex> AubryEstimate::nodes() const {
  std::vector<NodeIndex> out;
  for (NodeIndex k = 0; k < mask.size(); ++k) {
    if (mask[k]) out.push_back(k);
  }
  return out;
}

std::size_t AubryEstimate::count() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)); }

AubryEstimate estimate_from_pinning(const AlgorithmHistory& hist, double pin_tol, const EquilibriumList& eq) {
  if (!hist.limit) throw Error(ErrorCode::InvalidArgument, "aubry", "pinning needs a converged history");
  const VectorField& v0 = hist.initial();
  const VectorField& lim = *hist.limit;
  const TorusGrid& g = lim.grid();

  AubryEstimate est{std::vector<char>(g.size(), 0), AubryMethod::Pinning, GridField(g), pin_tol};
  bool pinned_any = false;
  for (NodeIndex x = 0; x < g.size(); ++x) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lim.m(); ++i) {
      const double d = lim[i][x] - v0[i][x];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    est.slack[x] = lo;
    if (hi <= pin_tol) {
      est.mask[x] = 1;
      pinned_any = true;
    }
  }
  bool added = false;
  for (NodeIndex x : eq.nodes) {
    if (!est.mask[x]) {
      est.mask[x] = 1;
      added = true;
    }
  }
  if (added) est.method = pinned_any ? AubryMethod::Union : AubryMethod::Equilibria;
  return est;
}

IsolationReport classify_isolated(const AubryEstimate& est, const EquilibriumList& eq, const TorusGrid& grid) {
  IsolationReport rep;
  std::vector<char> seen(est.mask.size(), 0);
  std::vector<NodeIndex> stack;
  for (NodeIndex start = 0; start < est.mask.size(); ++start) {
    if (!est.mask[start] || seen[start]) continue;
    std::vector<NodeIndex> comp;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const NodeIndex x = stack.back();
      stack.pop_back();
      comp.push_back(x);
      for (int ax = 0; ax < grid.dim(); ++ax) {
        for (int step : {-1, 1}) {
          const NodeIndex y = grid.shifted(x, ax, step);
          if (est.mask[y] && !seen[y]) {
            seen[y] = 1;
            stack.push_back(y);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    if (comp.size() == 1) {
      rep.isolated.push_back(comp.front());
      if (!eq.contains(comp.front())) rep.warnings.push_back(comp.front());
    }
    rep.components.push_back(std::move(comp));
  }
  return rep;
}

RigidityViolated::RigidityViolated(RigidityReport report)
    : Error(ErrorCode::RigidityViolated, "aubry",
            [&] {
              std::ostringstream os;
              os << "difference deviates from k*1 (k = " << report.k << ") by " << report.worst_deviation
                 << " at node " << report.worst_node << ", component " << report.worst_component;
              return os.str();
            }()),
      report_(report) {}

RigidityReport rigidity_report(const VectorField& u, const VectorField& v, const AubryEstimate& est, double tol) {
  if (u.m() != v.m() || !(u.grid() == v.grid()) || est.mask.size() != u.grid().size()) {
    throw Error(ErrorCode::InvalidArgument, "aubry", "rigidity inputs live on different grids");
  }
  RigidityReport r;
  const auto nodes = est.nodes();
  r.mask_nodes = nodes.size();
  if (nodes.empty()) return r;

  double sum = 0.0;
  for (NodeIndex x : nodes) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.m(); ++i) s += u[i][x] - v[i][x];
    sum += s / static_cast<double>(u.m());
  }
  r.k = sum / static_cast<double>(nodes.size());
  for (NodeIndex x : nodes) {
    for (std::size_t i = 0; i < u.m(); ++i) {
      const double dev = std::fabs(u[i][x] - v[i][x] - r.k);
      if (dev > r.worst_deviation) {
        r.worst_deviation = dev;
        r.worst_node = x;
        r.worst_component = i;
      }
    }
  }
  r.passed = r.worst_deviation <= tol;
  return r;
}

RigidityReport rigidity_check(const VectorField& u, const VectorField& v, const AubryEstimate& est, double tol) {
  auto r = rigidity_report(u, v, est, tol);
  if (!r.passed) throw RigidityViolated(r);
  return r;
}

}  // namespace hjsys
