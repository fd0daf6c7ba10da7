#include "hjsys/critical.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include "hjsys/kernels.hpp"

namespace hjsys {

namespace {

constexpr NodeIndex kReferenceNode = 0;

Error critical_error(ErrorCode code, const std::string& what) { return Error(code, "critical", what); }

// Neville's scheme evaluated at delta = 0.
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> p = y;
  const std::size_t n = x.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      const double xa = x[i];
      const double xb = x[i + level];
      p[i] = (xa * p[i + 1] - xb * p[i]) / (xa - xb);
    }
  }
  return p[0];
}

// Per-component kernels over a shared, mutable set of frozen problems.
struct ComponentKernels {
  std::vector<DiscountedProblem> problems;
  std::vector<kernels::BellmanKernel> kernels;

  ComponentKernels(const SystemProblem& sys, const SolverConfig& cfg, const VectorField& u, double beta,
                   double extra_discount) {
    problems.reserve(sys.m());
    for (std::size_t k = 0; k < sys.m(); ++k) problems.push_back(component_problem(sys, k, u, beta, extra_discount));
    kernels.reserve(sys.m());
    for (const auto& p : problems) kernels.emplace_back(p, cfg);
  }

  // Rebuilds the frozen source of component k from the current u.
  void refresh(const SystemProblem& sys, std::size_t k, const VectorField& u, double beta) {
    GridField& f = problems[k].source;
    const auto& a = sys.coupling();
    for (NodeIndex x = 0; x < f.size(); ++x) {
      double s = beta;
      for (std::size_t j = 0; j < sys.m(); ++j) {
        if (j != k) s -= a(k, j) * u[j][x];
      }
      f[x] = s;
    }
    kernels[k].refresh_source();
  }
};

double reference_mean(const SystemProblem& sys, const VectorField& u, NodeIndex node) {
  double s = 0.0;
  for (std::size_t i = 0; i < sys.m(); ++i) s += sys.distribution().o[i] * u[i][node];
  return s;
}

}  // namespace

SystemProblem::SystemProblem(TorusGrid grid, std::vector<HamiltonianComponent> components, CouplingMatrix coupling)
    : grid_(grid), components_(std::move(components)), coupling_(std::move(coupling)) {
  if (components_.empty() || components_.size() != coupling_.m()) {
    throw critical_error(ErrorCode::InvalidArgument, "component count must equal the coupling dimension");
  }
  o_ = equilibrium_distribution(coupling_);
  for (const auto& c : components_) {
    potentials_.push_back(GridField::sample(grid_, [&](const Vec& x) { return c.min_over_p(x); }));
  }
}

double SystemProblem::equilibrium_level() const {
  double best = -std::numeric_limits<double>::infinity();
  for (NodeIndex x = 0; x < grid_.size(); ++x) {
    double s = 0.0;
    for (std::size_t i = 0; i < m(); ++i) s += o_.o[i] * potentials_[i][x];
    best = std::max(best, s);
  }
  return best;
}

double SystemProblem::constant_level() const {
  double s = 0.0;
  for (std::size_t i = 0; i < m(); ++i) s += o_.o[i] * potentials_[i].max();
  return s;
}

double auto_speed_bound(const SystemProblem& sys) {
  double min_v = std::numeric_limits<double>::infinity();
  double c0 = 0.0;
  for (std::size_t i = 0; i < sys.m(); ++i) {
    min_v = std::min(min_v, sys.potential(i).min());
    c0 = std::max(c0, sys.component(i).kinetic_scale());
  }
  const double gap = std::max(0.0, sys.constant_level() - min_v);
  return std::max(1.0, 1.5 * std::sqrt(2.0 * c0 * gap));
}

double auto_time_step(const TorusGrid& grid) { return 0.5 * grid.spacing(); }

DiscountedProblem component_problem(const SystemProblem& sys, std::size_t k, const VectorField& u, double beta,
                                    double extra_discount) {
  const auto& a = sys.coupling();
  GridField f(sys.grid(), beta);
  for (NodeIndex x = 0; x < f.size(); ++x) {
    for (std::size_t j = 0; j < sys.m(); ++j) {
      if (j != k) f[x] -= a(k, j) * u[j][x];
    }
  }
  return {k, a(k, k) + extra_discount, sys.component(k), std::move(f)};
}

DiscountedSystemSolution solve_discounted_system(const SystemProblem& sys, const SolverConfig& cfg, double delta,
                                                 std::optional<VectorField> start) {
  cfg.check();
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw critical_error(ErrorCode::InvalidArgument, "discount delta must be positive");
  }
  VectorField u = start ? std::move(*start) : VectorField(sys.grid(), sys.m(), -sys.equilibrium_level() / delta);
  ComponentKernels ck(sys, cfg, u, 0.0, delta);
  GridField next(sys.grid());

  double inc = 0.0;
  for (int pass = 1; pass <= cfg.max_iterations; ++pass) {
    inc = 0.0;
    for (std::size_t k = 0; k < sys.m(); ++k) {
      if (sys.m() > 1) ck.refresh(sys, k, u, 0.0);
      ck.kernels[k].apply_implicit(u[k], next);
      inc = std::max(inc, kernels::sup_increment(next, u[k]));
      std::swap(u[k], next);
    }
    if (!std::isfinite(inc)) break;
    if (inc < cfg.fp_tolerance) return {std::move(u), pass, inc};
  }
  std::ostringstream os;
  os << "discounted system at delta = " << delta << " did not converge (last increment " << inc << ")";
  throw critical_error(ErrorCode::NoConvergence, os.str());
}

BetaEstimate estimate_beta(const SystemProblem& sys, const SolverConfig& cfg, const BetaOptions& opt) {
  if (opt.deltas.empty()) throw critical_error(ErrorCode::InvalidArgument, "at least one discount is required");
  for (std::size_t i = 0; i < opt.deltas.size(); ++i) {
    if (!(opt.deltas[i] > 0.0) || (i > 0 && !(opt.deltas[i] < opt.deltas[i - 1]))) {
      throw critical_error(ErrorCode::InvalidArgument, "discounts must be positive and strictly decreasing");
    }
  }

  BetaEstimate est;
  est.deltas = opt.deltas;
  est.reference_node = kReferenceNode;
  est.lower_bound = sys.equilibrium_level();
  est.upper_bound = sys.constant_level();

  std::optional<VectorField> warm;
  for (double delta : opt.deltas) {
    if (warm) {
      // Recenter the previous solution around the level it predicts.
      const double shift = -reference_mean(sys, *warm, kReferenceNode) - est.per_delta.back() / delta;
      for (std::size_t i = 0; i < sys.m(); ++i) (*warm)[i] = (*warm)[i] + shift;
    }
    auto sol = solve_discounted_system(sys, cfg, delta, std::move(warm));
    est.per_delta.push_back(-delta * reference_mean(sys, sol.u, kReferenceNode));
    est.passes.push_back(sol.passes);
    warm = std::move(sol.u);
  }
  est.extrapolated = extrapolate_to_zero(est.deltas, est.per_delta);

  if (est.extrapolated < est.lower_bound - opt.lower_bound_tol) {
    std::ostringstream os;
    os << "estimated beta " << est.extrapolated << " is below the equilibrium bound " << est.lower_bound
       << "; the grid is too coarse";
    throw critical_error(ErrorCode::LowerBoundViolated, os.str());
  }

  const double scale = std::max(1.0, std::fabs(est.upper_bound));
  est.equilibrium_certified = est.upper_bound - est.lower_bound <= 1e-12 * scale;
  est.value = est.equilibrium_certified ? est.lower_bound
                                        : std::clamp(est.extrapolated, est.lower_bound, est.upper_bound);
  return est;
}

namespace {

VectorField constant_guess(const SystemProblem& sys, double beta) {
  const std::size_t m = sys.m();
  if (m == 1) return VectorField(sys.grid(), 1, 0.0);
  Eigen::VectorXd r(m);
  for (std::size_t i = 0; i < m; ++i) r(i) = beta - sys.potential(i).max();
  double proj = 0.0;
  for (std::size_t i = 0; i < m; ++i) proj += sys.distribution().o[i] * r(i);
  r.array() -= proj;

  // A has rank m - 1; o . c = 0 picks one solution.
  Eigen::MatrixXd mat(m + 1, m);
  Eigen::VectorXd rhs(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) mat(i, j) = sys.coupling()(i, j);
    rhs(i) = r(i);
  }
  for (std::size_t j = 0; j < m; ++j) mat(m, j) = sys.distribution().o[j];
  rhs(m) = 0.0;
  const Eigen::VectorXd c = mat.colPivHouseholderQr().solve(rhs);

  std::vector<GridField> comps;
  for (std::size_t i = 0; i < m; ++i) comps.emplace_back(sys.grid(), c(i));
  return VectorField(std::move(comps));
}

}  // namespace

double subsolution_defect(const VectorField& w, const SystemProblem& sys, double beta, const SolverConfig& cfg) {
  double worst = -std::numeric_limits<double>::infinity();
  GridField tw(sys.grid());
  for (std::size_t k = 0; k < sys.m(); ++k) {
    const auto prob = component_problem(sys, k, w, beta);
    kernels::BellmanKernel kernel(prob, cfg);
    kernel.apply(w[k], tw);
    for (NodeIndex x = 0; x < tw.size(); ++x) worst = std::max(worst, w[k][x] - tw[x]);
  }
  return worst;
}

namespace {

// w_k <- min(w_k, T_k[w](w_k)) until no node moves by more than tol.
void project_onto_subsolutions(VectorField& w, const SystemProblem& sys, double beta, const SolverConfig& cfg,
                               const SubsolutionOptions& opt) {
  ComponentKernels ck(sys, cfg, w, beta, 0.0);
  GridField next(sys.grid());
  for (int pass = 0; pass < opt.max_passes; ++pass) {
    double dec = 0.0;
    for (std::size_t k = 0; k < sys.m(); ++k) {
      if (sys.m() > 1) ck.refresh(sys, k, w, beta);
      ck.kernels[k].apply_implicit(w[k], next);
      for (NodeIndex x = 0; x < next.size(); ++x) {
        if (next[x] < w[k][x]) {
          dec = std::max(dec, w[k][x] - next[x]);
          w[k][x] = next[x];
        }
      }
    }
    if (!std::isfinite(dec)) break;
    if (dec <= opt.projection_tol) return;
  }
  throw critical_error(ErrorCode::SubsolutionConstructionFailed,
                       "projection onto discrete subsolutions did not settle; beta may be below the critical value");
}

VectorField blend(double theta, const VectorField& a, const VectorField& b) {
  std::vector<GridField> comps;
  for (std::size_t i = 0; i < a.m(); ++i) comps.push_back(theta * a[i] + (1.0 - theta) * b[i]);
  return VectorField(std::move(comps));
}

}  // namespace

VectorField initial_subsolution(const SystemProblem& sys, double beta, const SolverConfig& cfg,
                                const SubsolutionOptions& opt) {
  cfg.check();
  auto slack_error = [&](double slack) {
    std::ostringstream os;
    os << "subsolution slack " << slack << " exceeds " << opt.slack_tol << "; the grid is too coarse for beta = "
       << beta;
    return critical_error(ErrorCode::SubsolutionConstructionFailed, os.str());
  };

  VectorField c = constant_guess(sys, beta);
  project_onto_subsolutions(c, sys, beta, cfg, opt);
  if (opt.guess == InitialGuess::Constant) {
    const double slack = residual(c, sys, beta).max_signed_upwind;
    if (slack > opt.slack_tol) throw slack_error(slack);
    return c;
  }

  auto sol = solve_discounted_system(sys, cfg, opt.delta);
  const double ref = reference_mean(sys, sol.u, kReferenceNode);
  for (std::size_t i = 0; i < sys.m(); ++i) sol.u[i] = sol.u[i] - ref;
  VectorField w = std::move(sol.u);
  project_onto_subsolutions(w, sys, beta, cfg, opt);

  // Discrete subsolutions form a convex set, so blending with the projected
  // constant keeps the property while pulling the finite-difference slack
  // towards that of the constant.
  double slack = 0.0;
  for (double theta = 1.0; theta >= 1.0 / 64.0; theta *= 0.5) {
    VectorField cand = theta == 1.0 ? w : blend(theta, w, c);
    slack = residual(cand, sys, beta).max_signed_upwind;
    if (slack <= opt.slack_tol) return cand;
  }
  throw slack_error(slack);
}

VectorField sweep(const VectorField& v_prev, const SystemProblem& sys, double beta, const SolverConfig& cfg,
                  SweepStats* stats) {
  VectorField v = v_prev;
  if (stats) stats->inner_iterations.assign(sys.m(), 0);
  for (std::size_t k = 0; k < sys.m(); ++k) {
    const auto prob = component_problem(sys, k, v, beta);
    try {
      auto sol = solve_discounted(prob, cfg, v_prev[k]);
      if (stats) stats->inner_iterations[k] = sol.iterations;
      v[k] = std::move(sol.value);
    } catch (const MaxIterationsExceeded& e) {
      throw critical_error(ErrorCode::NoConvergence,
                           "component " + std::to_string(k) + ": " + std::string(e.what()));
    }
  }
  return v;
}

ResidualReport residual(const VectorField& v, const SystemProblem& sys, double beta) {
  const TorusGrid& g = sys.grid();
  const auto& a = sys.coupling();
  const std::size_t m = sys.m();
  ResidualReport r;
  r.max_signed_upwind = -std::numeric_limits<double>::infinity();
  std::vector<double> u(m);
  for (std::size_t i = 0; i < m; ++i) {
    r.upwind.emplace_back(g);
    r.forward.emplace_back(g);
    r.backward.emplace_back(g);
  }
  for (NodeIndex x = 0; x < g.size(); ++x) {
    for (std::size_t j = 0; j < m; ++j) u[j] = v[j][x];
    const Vec pt = g.coords(x);
    for (std::size_t i = 0; i < m; ++i) {
      const auto os = one_sided_gradients(v[i], x);
      Vec up{0.0, 0.0};
      for (int ax = 0; ax < g.dim(); ++ax) {
        up[ax] = std::fabs(os.forward[ax]) >= std::fabs(os.backward[ax]) ? os.forward[ax] : os.backward[ax];
      }
      const double coupling = a.row_dot(i, u.data()) - beta;
      const auto& h = sys.component(i);
      const double hu = h.eval_h(pt, up) + coupling;
      r.upwind[i][x] = std::fabs(hu);
      r.forward[i][x] = h.eval_h(pt, os.forward) + coupling;
      r.backward[i][x] = h.eval_h(pt, os.backward) + coupling;
      r.max_signed_upwind = std::max(r.max_signed_upwind, hu);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    r.max_per_component.push_back(r.upwind[i].max());
    r.solution_residual = std::max(r.solution_residual, r.max_per_component.back());
  }
  return r;
}

double AlgorithmHistory::monotonicity_worst() const {
  double w = std::numeric_limits<double>::infinity();
  for (double s : min_steps) w = std::min(w, s);
  return w;
}

NotConverged::NotConverged(AlgorithmHistory history)
    : Error(ErrorCode::NotConverged, "critical",
            [&] {
              std::ostringstream os;
              os << "no convergence after " << history.sweeps() << " sweeps";
              if (!history.increments.empty()) os << " (last increment " << history.increments.back() << ")";
              return os.str();
            }()),
      history_(std::move(history)) {}

AlgorithmHistory run_algorithm(const SystemProblem& sys, double beta, const VectorField& w0, const SolverConfig& cfg,
                               const AlgorithmOptions& opt) {
  if (w0.m() != sys.m() || !(w0.grid() == sys.grid())) {
    throw critical_error(ErrorCode::InvalidArgument, "initial field does not match the system");
  }
  for (const auto& c : w0) {
    if (!c.all_finite()) throw critical_error(ErrorCode::InvalidArgument, "initial field has non-finite values");
  }
  if (!(opt.stop_tol > 0.0) || opt.max_sweeps < 1) {
    throw critical_error(ErrorCode::InvalidArgument, "stop_tol must be positive and max_sweeps at least 1");
  }

  AlgorithmHistory h;
  h.beta_used = beta;
  h.iterates.push_back(w0);
  VectorField cur = w0;
  for (int n = 0; n < opt.max_sweeps; ++n) {
    SweepStats stats;
    VectorField next = sweep(cur, sys, beta, cfg, &stats);
    double inc = 0.0;
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sys.m(); ++i) {
      for (NodeIndex x = 0; x < next[i].size(); ++x) {
        const double d = next[i][x] - cur[i][x];
        inc = std::max(inc, std::fabs(d));
        low = std::min(low, d);
      }
    }
    h.increments.push_back(inc);
    h.min_steps.push_back(low);
    int total = 0;
    for (int it : stats.inner_iterations) total += it;
    h.inner_iterations.push_back(total);
    cur = std::move(next);
    if (opt.keep_iterates) h.iterates.push_back(cur);
    if (inc < opt.stop_tol) {
      h.converged = true;
      break;
    }
  }
  if (!opt.keep_iterates) h.iterates.push_back(cur);
  if (!h.converged) throw NotConverged(std::move(h));
  h.residual = residual(cur, sys, beta);
  h.limit = std::move(cur);
  return h;
}

}  // namespace hjsys
