#include "hjsys/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hjsys::kernels {

namespace {

constexpr double kTieTolerance = 1e-12;

inline int wrap_small(int i, int n) {
  if (i < 0) return i + n;
  if (i >= n) return i - n;
  return i;
}

}  // namespace

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

BellmanKernel::BellmanKernel(const DiscountedProblem& prob, const SolverConfig& cfg)
    : prob_(&prob), cfg_(cfg), w_(discount_weights(prob.discount, cfg.dt)) {
  const TorusGrid& g = prob.source.grid();
  const double n = g.n();
  const double c0 = prob.hamiltonian.kinetic_scale();

  for (const Vec& q : velocity_candidates(g.dim(), cfg)) {
    Stencil s;
    s.velocity = q;
    s.kinetic = norm2(q) / (2.0 * c0);

    int base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int k = 0; k < g.dim(); ++k) {
      const double cells = -q[k] * cfg.dt * n;
      const double fl = std::floor(cells);
      base[k] = static_cast<int>(fl);
      frac[k] = cells - fl;
    }
    if (g.dim() == 1) {
      s.offset[0] = {base[0], 0};
      s.weight[0] = 1.0 - frac[0];
      s.offset[1] = {base[0] + 1, 0};
      s.weight[1] = frac[0];
      s.count = 2;
    } else {
      int e = 0;
      for (int dj = 0; dj < 2; ++dj) {
        for (int di = 0; di < 2; ++di) {
          s.offset[e] = {base[0] + di, base[1] + dj};
          s.weight[e] = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]);
          ++e;
        }
      }
      s.count = 4;
    }
    for (int e = 0; e < s.count; ++e) {
      if (s.offset[e][0] == 0 && s.offset[e][1] == 0) s.self_slot = e;
    }
    stencils_.push_back(s);
  }

  potential_.resize(g.size());
  const auto& V = prob.hamiltonian.potential();
  for (NodeIndex k = 0; k < g.size(); ++k) potential_[k] = V(g.coords(k));
  refresh_source();
}

void BellmanKernel::refresh_source() {
  running_.resize(potential_.size());
  for (NodeIndex k = 0; k < potential_.size(); ++k) running_[k] = prob_->source[k] - potential_[k];
}

double BellmanKernel::node_explicit(const GridField& v, NodeIndex node) const {
  const TorusGrid& g = v.grid();
  const int n = g.n();
  const auto [i, j] = g.multi_index(node);
  const bool two_d = g.dim() == 2;
  double best = std::numeric_limits<double>::infinity();
  for (const Stencil& s : stencils_) {
    double interp = 0.0;
    for (int e = 0; e < s.count; ++e) {
      const int ii = wrap_small(i + s.offset[e][0], n);
      const NodeIndex idx = two_d ? static_cast<NodeIndex>(ii) + static_cast<NodeIndex>(wrap_small(j + s.offset[e][1], n)) * n
                                  : static_cast<NodeIndex>(ii);
      interp += s.weight[e] * v[idx];
    }
    const double val = w_.weight * (s.kinetic + running_[node]) + w_.rho * interp;
    best = std::min(best, val);
  }
  return best;
}

double BellmanKernel::node_implicit(const GridField& v, NodeIndex node) const {
  const TorusGrid& g = v.grid();
  const int n = g.n();
  const auto [i, j] = g.multi_index(node);
  const bool two_d = g.dim() == 2;
  double best = std::numeric_limits<double>::infinity();
  for (const Stencil& s : stencils_) {
    double others = 0.0;
    double self_weight = 0.0;
    for (int e = 0; e < s.count; ++e) {
      if (e == s.self_slot) {
        self_weight = s.weight[e];
        continue;
      }
      const int ii = wrap_small(i + s.offset[e][0], n);
      const NodeIndex idx = two_d ? static_cast<NodeIndex>(ii) + static_cast<NodeIndex>(wrap_small(j + s.offset[e][1], n)) * n
                                  : static_cast<NodeIndex>(ii);
      others += s.weight[e] * v[idx];
    }
    const double alpha = w_.weight * (s.kinetic + running_[node]) + w_.rho * others;
    const double denom = 1.0 - w_.rho * self_weight;
    // v(x) = alpha + rho * self_weight * v(x), solved for v(x) unless the
    // candidate is stationary in an undiscounted problem.
    const double val = denom > 1e-12 ? alpha / denom : alpha + w_.rho * self_weight * v[node];
    best = std::min(best, val);
  }
  return best;
}

void BellmanKernel::apply(const GridField& v, GridField& out) const {
  const auto size = static_cast<std::ptrdiff_t>(v.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < size; ++k) out[static_cast<NodeIndex>(k)] = node_explicit(v, static_cast<NodeIndex>(k));
}

void BellmanKernel::apply_implicit(const GridField& v, GridField& out) const {
  const auto size = static_cast<std::ptrdiff_t>(v.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < size; ++k) out[static_cast<NodeIndex>(k)] = node_implicit(v, static_cast<NodeIndex>(k));
}

void BellmanKernel::apply_serial(const GridField& v, GridField& out) const {
  for (NodeIndex k = 0; k < v.size(); ++k) out[k] = node_explicit(v, k);
}

void BellmanKernel::apply_implicit_serial(const GridField& v, GridField& out) const {
  for (NodeIndex k = 0; k < v.size(); ++k) out[k] = node_implicit(v, k);
}

BellmanKernel::Choice BellmanKernel::argmin_at(const GridField& v, const Vec& y) const {
  const double f = interpolate(prob_->source, y);
  std::vector<double> vals(stencils_.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < stencils_.size(); ++c) {
    const Vec& q = stencils_[c].velocity;
    const Vec foot{y[0] - q[0] * cfg_.dt, y[1] - q[1] * cfg_.dt};
    vals[c] = w_.weight * (prob_->hamiltonian.eval_lagrangian(y, q) + f) + w_.rho * interpolate(v, foot);
    best = std::min(best, vals[c]);
  }
  for (std::size_t c = 0; c < vals.size(); ++c) {
    if (vals[c] <= best + kTieTolerance) return {vals[c], c};
  }
  return {best, 0};
}

GridField bellman_update_reference(const GridField& v, const DiscountedProblem& prob, const SolverConfig& cfg) {
  const TorusGrid& g = v.grid();
  const auto w = discount_weights(prob.discount, cfg.dt);
  const auto velocities = velocity_candidates(g.dim(), cfg);
  GridField out(g);
  for (NodeIndex k = 0; k < g.size(); ++k) {
    const Vec x = g.coords(k);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& q : velocities) {
      const Vec foot{x[0] - q[0] * cfg.dt, x[1] - q[1] * cfg.dt};
      const double val =
          w.weight * (prob.hamiltonian.eval_lagrangian(x, q) + prob.source[k]) + w.rho * interpolate(v, foot);
      best = std::min(best, val);
    }
    out[k] = best;
  }
  return out;
}

double sup_increment(const GridField& a, const GridField& b) {
  const auto size = static_cast<std::ptrdiff_t>(a.size());
  double d = 0.0;
#pragma omp parallel for reduction(max : d) schedule(static)
  for (std::ptrdiff_t k = 0; k < size; ++k) {
    d = std::max(d, std::fabs(a[static_cast<NodeIndex>(k)] - b[static_cast<NodeIndex>(k)]));
  }
  return d;
}

}  // namespace hjsys::kernels
