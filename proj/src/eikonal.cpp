#include "hjsys/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <utility>

namespace hjsys {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxListedViolations = 16;

void require_feasible(const IntrinsicMetricGraph& metric) {
  if (metric.infeasible().empty()) return;
  std::ostringstream os;
  os << "level " << metric.level() << " is below min_p H at " << metric.infeasible().size() << " nodes (first "
     << metric.infeasible().front() << ")";
  throw Error(ErrorCode::InfeasibleLevel, "eikonal", os.str());
}

// Dijkstra from several sources at once; `origin` records which source
// realizes each distance.
void shortest_paths(const IntrinsicMetricGraph& metric, const std::vector<std::pair<NodeIndex, double>>& sources,
                    std::vector<double>& dist, std::vector<NodeIndex>& origin) {
  const std::size_t n = metric.grid().size();
  dist.assign(n, kInf);
  origin.assign(n, n);
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (const auto& [s, d0] : sources) {
    if (d0 < dist[s]) {
      dist[s] = d0;
      origin[s] = s;
      pq.push({d0, s});
    }
  }
  const std::size_t deg = metric.degree();
  while (!pq.empty()) {
    const auto [d, x] = pq.top();
    pq.pop();
    if (d > dist[x]) continue;
    const auto* e = metric.edges(x);
    for (std::size_t k = 0; k < deg; ++k) {
      const double nd = d + e[k].cost;
      if (nd < dist[e[k].to]) {
        dist[e[k].to] = nd;
        origin[e[k].to] = origin[x];
        pq.push({nd, e[k].to});
      }
    }
  }
}

// Edge costs live on the lattice 2^-40 Z. Path sums below 2^12 are then exact
// in double precision, so shortest-path distances satisfy the triangle
// inequality bit for bit regardless of summation order.
double snap(double c) { return std::ldexp(std::nearbyint(std::ldexp(c, 40)), -40); }

}  // namespace

EffectiveHamiltonian effective_hamiltonian(const SystemProblem& sys, std::size_t i, const VectorField& u) {
  GridField shift(sys.grid());
  std::vector<double> vals(sys.m());
  for (NodeIndex x = 0; x < shift.size(); ++x) {
    for (std::size_t j = 0; j < sys.m(); ++j) vals[j] = u[j][x];
    shift[x] = sys.coupling().row_dot(i, vals.data());
  }
  return {sys.component(i), std::move(shift)};
}

EffectiveHamiltonian effective_hamiltonian(const HamiltonianComponent& base, const TorusGrid& grid) {
  return {base, GridField(grid)};
}

IntrinsicMetricGraph::IntrinsicMetricGraph(const EffectiveHamiltonian& eff, double level)
    : grid_(eff.shift.grid()), level_(level), base_(eff.base) {
  if (!std::isfinite(level) || !eff.shift.all_finite()) {
    throw Error(ErrorCode::InvalidArgument, "eikonal", "level and shift must be finite");
  }
  const std::size_t n = grid_.size();
  slack_.resize(n);
  for (NodeIndex x = 0; x < n; ++x) {
    const double s = level - eff.min_over_p(x);
    if (s < -kFeasibilityTolerance) infeasible_.push_back(x);
    slack_[x] = std::max(0.0, s);
  }

  if (grid_.dim() == 1) {
    offsets_ = {{1, 0}, {-1, 0}};
  } else {
    offsets_ = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
  }
  const double h = grid_.spacing();
  edges_.resize(n * offsets_.size());
  std::vector<char> bad(n, 0);
  for (NodeIndex x : infeasible_) bad[x] = 1;
  for (NodeIndex x = 0; x < n; ++x) {
    const auto [i, j] = grid_.multi_index(x);
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      const auto& off = offsets_[k];
      const NodeIndex y = grid_.flat(i + off[0], j + off[1]);
      const double len = h * std::sqrt(static_cast<double>(off[0] * off[0] + off[1] * off[1]));
      const Vec e{off[0] * h / len, off[1] * h / len};
      double cost = kInf;
      if (!bad[x] && !bad[y]) cost = snap(len * 0.5 * (support(x, e) + support(y, e)));
      edges_[x * offsets_.size() + k] = {y, cost};
    }
  }
}

double IntrinsicMetricGraph::support(NodeIndex node, const Vec& q) const {
  return base_.support_from_slack(slack_[node], q);
}

GridField intrinsic_distance(const IntrinsicMetricGraph& metric, NodeIndex source) {
  require_feasible(metric);
  if (source >= metric.grid().size()) throw Error(ErrorCode::InvalidArgument, "eikonal", "source node out of range");
  std::vector<double> dist;
  std::vector<NodeIndex> origin;
  shortest_paths(metric, {{source, 0.0}}, dist, origin);
  return GridField(metric.grid(), std::move(dist));
}

double scalar_critical_value(const EffectiveHamiltonian& eff) {
  double c = -kInf;
  for (NodeIndex x = 0; x < eff.shift.size(); ++x) c = std::max(c, eff.min_over_p(x));
  return c;
}

std::vector<NodeIndex> scalar_aubry(const EffectiveHamiltonian& eff, double c, double tol) {
  std::vector<NodeIndex> out;
  for (NodeIndex x = 0; x < eff.shift.size(); ++x) {
    if (std::fabs(eff.min_over_p(x) - c) <= tol) out.push_back(x);
  }
  return out;
}

IncompatibleTrace::IncompatibleTrace(NodeIndex from, NodeIndex to, double gap)
    : Error(ErrorCode::IncompatibleTrace, "eikonal",
            [&] {
              std::ostringstream os;
              os << "trace(" << to << ") - trace(" << from << ") exceeds the intrinsic distance by " << gap;
              return os.str();
            }()),
      from_(from),
      to_(to),
      gap_(gap) {}

GridField maximal_subsolution(const IntrinsicMetricGraph& metric, const std::vector<NodeIndex>& trace_nodes,
                              const std::vector<double>& trace_values, double tol) {
  require_feasible(metric);
  if (trace_nodes.empty() || trace_nodes.size() != trace_values.size()) {
    throw Error(ErrorCode::InvalidArgument, "eikonal", "trace needs matching, non-empty node and value lists");
  }
  std::vector<std::pair<NodeIndex, double>> sources;
  for (std::size_t k = 0; k < trace_nodes.size(); ++k) {
    if (trace_nodes[k] >= metric.grid().size() || !std::isfinite(trace_values[k])) {
      throw Error(ErrorCode::InvalidArgument, "eikonal", "trace node out of range or value not finite");
    }
    sources.emplace_back(trace_nodes[k], trace_values[k]);
  }
  std::vector<double> dist;
  std::vector<NodeIndex> origin;
  shortest_paths(metric, sources, dist, origin);

  // u <= trace on trace nodes always; strict inequality exposes the pair.
  for (std::size_t k = 0; k < trace_nodes.size(); ++k) {
    const NodeIndex x = trace_nodes[k];
    const double gap = trace_values[k] - dist[x];
    if (gap > tol * std::max(1.0, std::fabs(trace_values[k]))) throw IncompatibleTrace(origin[x], x, gap);
  }
  for (std::size_t k = 0; k < trace_nodes.size(); ++k) dist[trace_nodes[k]] = trace_values[k];
  return GridField(metric.grid(), std::move(dist));
}

MetricCheckReport metric_subsolution_check(const GridField& u, const IntrinsicMetricGraph& metric,
                                           std::size_t sample_pairs, std::uint64_t seed, double tol) {
  if (!(u.grid() == metric.grid())) {
    throw Error(ErrorCode::InvalidArgument, "eikonal", "field and metric live on different grids");
  }
  MetricCheckReport rep;
  rep.seed = seed;
  auto record = [&](NodeIndex from, NodeIndex to, double gap, std::size_t& counter) {
    rep.worst_gap = std::max(rep.worst_gap, gap);
    if (gap > tol) {
      ++counter;
      if (rep.violations.size() < kMaxListedViolations) rep.violations.push_back({from, to, gap});
    }
  };

  const std::size_t n = u.size();
  for (NodeIndex y = 0; y < n; ++y) {
    const auto* e = metric.edges(y);
    for (std::size_t k = 0; k < metric.degree(); ++k) {
      ++rep.edges_checked;
      record(y, e[k].to, u[e[k].to] - u[y] - e[k].cost, rep.edge_violations);
    }
  }

  if (sample_pairs == 0 || !metric.infeasible().empty()) return rep;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeIndex> pick(0, n - 1);
  const std::size_t sources = std::min<std::size_t>(sample_pairs, 16);
  const std::size_t per_source = (sample_pairs + sources - 1) / sources;
  for (std::size_t s = 0; s < sources && rep.pairs_checked < sample_pairs; ++s) {
    const NodeIndex y = pick(rng);
    const GridField d = intrinsic_distance(metric, y);
    for (std::size_t t = 0; t < per_source && rep.pairs_checked < sample_pairs; ++t) {
      const NodeIndex x = pick(rng);
      ++rep.pairs_checked;
      record(y, x, u[x] - u[y] - d[x], rep.pair_violations);
    }
  }
  return rep;
}

}  // namespace hjsys
