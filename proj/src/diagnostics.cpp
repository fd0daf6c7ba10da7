#include "hjsys/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "hjsys/error.hpp"

namespace hjsys {

namespace {

std::vector<std::array<int, 2>> shell(int dim, int r) {
  if (dim == 1) return {{r, 0}, {-r, 0}};
  return {{r, 0}, {-r, 0}, {0, r}, {0, -r}, {r, r}, {-r, r}, {r, -r}, {-r, -r}};
}

double max_jump(const GridField& field, NodeIndex node) {
  const auto os = one_sided_gradients(field, node);
  double j = 0.0;
  for (int ax = 0; ax < field.grid().dim(); ++ax) j = std::max(j, std::fabs(os.forward[ax] - os.backward[ax]));
  return j;
}

}  // namespace

LipschitzEstimate lipschitz_estimate(const GridField& field) {
  const TorusGrid& g = field.grid();
  double l = 0.0;
  for (NodeIndex x = 0; x < g.size(); ++x) {
    for (int ax = 0; ax < g.dim(); ++ax) {
      l = std::max(l, std::fabs(field[g.shifted(x, ax, 1)] - field[x]) / g.spacing());
    }
  }
  return {l};
}

std::size_t SuperdiffReport::passes() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.passed; }));
}

SuperdiffEntry superdifferential_probe(const GridField& field, NodeIndex node, const std::vector<int>& radii_cells,
                                       double lipschitz) {
  const TorusGrid& g = field.grid();
  if (radii_cells.empty() || node >= g.size()) {
    throw Error(ErrorCode::InvalidArgument, "diagnostics", "probe needs radii and a valid node");
  }
  for (std::size_t k = 0; k < radii_cells.size(); ++k) {
    if (radii_cells[k] < 1 || 2 * radii_cells[k] >= g.n() || (k > 0 && radii_cells[k] <= radii_cells[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "diagnostics", "radii must increase and stay below half a period");
    }
  }
  if (lipschitz <= 0.0) lipschitz = lipschitz_estimate(field).value;

  const double h = g.spacing();
  const auto [i, j] = g.multi_index(node);
  const double u0 = field[node];

  SuperdiffEntry e;
  e.node = node;

  // Least squares on the innermost shell: sum (du - p.d)^2.
  {
    double m00 = 0.0, m01 = 0.0, m11 = 0.0, b0 = 0.0, b1 = 0.0;
    for (const auto& off : shell(g.dim(), radii_cells.front())) {
      const double d0 = off[0] * h;
      const double d1 = off[1] * h;
      const double du = field[g.flat(i + off[0], j + off[1])] - u0;
      m00 += d0 * d0;
      m01 += d0 * d1;
      m11 += d1 * d1;
      b0 += d0 * du;
      b1 += d1 * du;
    }
    if (g.dim() == 1) {
      e.slope = {b0 / m00, 0.0};
    } else {
      const double det = m00 * m11 - m01 * m01;
      e.slope = {(m11 * b0 - m01 * b1) / det, (m00 * b1 - m01 * b0) / det};
    }
  }

  for (int r : radii_cells) {
    double eps = 0.0;
    for (const auto& off : shell(g.dim(), r)) {
      const double du = field[g.flat(i + off[0], j + off[1])] - u0;
      eps = std::max(eps, du - (e.slope[0] * off[0] * h + e.slope[1] * off[1] * h));
    }
    e.radii.push_back(r * h);
    e.eps.push_back(eps < kSuperdiffFloor ? 0.0 : eps);
  }

  // Fit log eps = a + exponent log r over radii where eps is resolved.
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < e.eps.size(); ++k) {
    if (e.eps[k] > 0.0) {
      lx.push_back(std::log(e.radii[k]));
      ly.push_back(std::log(e.eps[k]));
    }
  }
  if (e.eps.front() == 0.0 || lx.size() < 2) {
    e.exponent = e.eps.front() == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      mx += lx[k];
      my += ly[k];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxx += (lx[k] - mx) * (lx[k] - mx);
      sxy += (lx[k] - mx) * (ly[k] - my);
    }
    e.exponent = sxy / sxx;
  }

  const double finest = e.eps.front() / e.radii.front();
  e.ratio = lipschitz > 0.0 ? finest / lipschitz : (finest == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  e.passed = e.exponent >= kSuperdiffExponent || e.ratio <= kSuperdiffRatio;
  return e;
}

SuperdiffReport superdifferential_probe(const GridField& field, const std::vector<NodeIndex>& nodes,
                                        const std::vector<int>& radii_cells) {
  const double l = lipschitz_estimate(field).value;
  SuperdiffReport rep;
  rep.entries.resize(nodes.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(nodes.size()); ++k) {
    rep.entries[static_cast<std::size_t>(k)] =
        superdifferential_probe(field, nodes[static_cast<std::size_t>(k)], radii_cells, l);
  }
  return rep;
}

StrictDiffReport strict_differentiability_probe(const GridField& field, NodeIndex node, double lipschitz) {
  const TorusGrid& g = field.grid();
  if (node >= g.size()) throw Error(ErrorCode::InvalidArgument, "diagnostics", "node out of range");
  if (lipschitz <= 0.0) lipschitz = lipschitz_estimate(field).value;

  StrictDiffReport r;
  r.node = node;
  const auto os = one_sided_gradients(field, node);
  r.forward = os.forward;
  r.backward = os.backward;
  r.tolerance = 5.0 * g.spacing() * lipschitz;

  const double at = max_jump(field, node);
  double around = 0.0;
  for (int ax = 0; ax < g.dim(); ++ax) {
    for (int step : {-1, 1}) around = std::max(around, max_jump(field, g.shifted(node, ax, step)));
  }
  r.worst_jump = std::max(at, around);
  r.at_node = at <= r.tolerance;
  r.at_neighbors = around <= r.tolerance;
  return r;
}

}  // namespace hjsys
