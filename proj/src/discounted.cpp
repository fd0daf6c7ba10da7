#include "hjsys/discounted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "hjsys/kernels.hpp"

namespace hjsys {

void SolverConfig::check() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "discounted", what); };
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(speed_bound > 0.0) || !std::isfinite(speed_bound)) fail("speed_bound must be positive");
  if (candidates_per_axis < 1 || candidates_per_axis % 2 == 0) fail("candidates_per_axis must be odd and positive");
  if (!(fp_tolerance > 0.0)) fail("fp_tolerance must be positive");
  if (max_iterations < 1) fail("max_iterations must be positive");
  if (refinement_levels < 0 || refinement_levels > 30) fail("refinement_levels must lie in [0, 30]");
  if (speed_bound * dt >= 0.5) fail("speed_bound * dt must stay below half a period");
}

std::vector<Vec> velocity_candidates(int dim, const SolverConfig& cfg) {
  const int k = cfg.candidates_per_axis;
  std::vector<double> axis(k);
  for (int i = 0; i < k; ++i) {
    axis[i] = k == 1 ? 0.0 : -cfg.speed_bound + 2.0 * cfg.speed_bound * i / (k - 1);
  }
  axis[k / 2] = 0.0;  // exact stationary control
  if (k > 1) {
    const double dq = 2.0 * cfg.speed_bound / (k - 1);
    for (int j = 1; j <= cfg.refinement_levels; ++j) {
      axis.push_back(dq * std::ldexp(1.0, -j));
      axis.push_back(-dq * std::ldexp(1.0, -j));
    }
    std::sort(axis.begin(), axis.end());
  }

  std::vector<Vec> out;
  if (dim == 1) {
    for (double a : axis) out.push_back({a, 0.0});
  } else {
    for (double a : axis)
      for (double b : axis) out.push_back({a, b});
  }
  return out;
}

DiscountWeights discount_weights(double discount, double dt) {
  if (discount == 0.0) return {1.0, dt};
  return {std::exp(-discount * dt), -std::expm1(-discount * dt) / discount};
}

namespace {

void check_problem(const DiscountedProblem& prob) {
  if (!(prob.discount >= 0.0) || !std::isfinite(prob.discount)) {
    throw Error(ErrorCode::InvalidArgument, "discounted", "discount must be finite and non-negative");
  }
  if (!prob.source.all_finite()) {
    throw Error(ErrorCode::InvalidArgument, "discounted", "source field has non-finite values");
  }
}

}  // namespace

GridField bellman_update(const GridField& v, const DiscountedProblem& prob, const SolverConfig& cfg) {
  cfg.check();
  check_problem(prob);
  kernels::BellmanKernel kernel(prob, cfg);
  GridField out(v.grid());
  kernel.apply(v, out);
  return out;
}

MaxIterationsExceeded::MaxIterationsExceeded(int iterations, double last_increment)
    : Error(ErrorCode::MaxIterationsExceeded, "discounted",
            [&] {
              std::ostringstream os;
              os << "fixed-point iteration did not converge in " << iterations
                 << " iterations (last increment " << last_increment << ")";
              return os.str();
            }()),
      iterations_(iterations),
      last_increment_(last_increment) {}

DiscountedSolution solve_discounted(const DiscountedProblem& prob, const SolverConfig& cfg) {
  if (prob.discount == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "discounted",
                "an undiscounted problem has no default start f/a; pass an explicit initial field");
  }
  return solve_discounted(prob, cfg, (1.0 / prob.discount) * prob.source);
}

DiscountedSolution solve_discounted(const DiscountedProblem& prob, const SolverConfig& cfg, GridField v0) {
  cfg.check();
  check_problem(prob);
  if (!(v0.grid() == prob.source.grid())) {
    throw Error(ErrorCode::InvalidArgument, "discounted", "initial field and source live on different grids");
  }

  kernels::BellmanKernel kernel(prob, cfg);
  GridField cur = std::move(v0);
  GridField next(cur.grid());
  double inc = 0.0;
  int it = 0;
  while (true) {
    if (cfg.scheme == UpdateScheme::LocallyImplicit) {
      kernel.apply_implicit(cur, next);
    } else {
      kernel.apply(cur, next);
    }
    inc = kernels::sup_increment(next, cur);
    std::swap(cur, next);
    ++it;
    if (!std::isfinite(inc)) throw MaxIterationsExceeded(it, inc);
    if (inc < cfg.fp_tolerance) break;
    if (it >= cfg.max_iterations) throw MaxIterationsExceeded(it, inc);
  }

  kernel.apply(cur, next);
  const double residual = kernels::sup_increment(next, cur);
  return {std::move(cur), it, inc, residual};
}

double Trajectory::value_gap() const {
  return std::fabs(running_cost + terminal_discount * terminal_value - start_value);
}

Trajectory extract_trajectory(const GridField& v, const DiscountedProblem& prob, const SolverConfig& cfg,
                              const Vec& x0, double horizon) {
  cfg.check();
  check_problem(prob);
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::InvalidArgument, "discounted", "horizon must be finite and non-negative");
  }
  kernels::BellmanKernel kernel(prob, cfg);
  const auto w = kernel.weights();
  const auto steps = static_cast<long>(std::floor(horizon / cfg.dt + 1e-9));

  Trajectory tr;
  Vec x = wrap_point(x0);
  tr.start_value = interpolate(v, x);
  double discount = 1.0;
  for (long k = 0; k < steps; ++k) {
    const auto choice = kernel.argmin_at(v, x);
    const Vec q = kernel.stencils()[choice.candidate].velocity;
    const double cost = prob.hamiltonian.eval_lagrangian(x, q) + interpolate(prob.source, x);
    tr.samples.push_back({-static_cast<double>(k) * cfg.dt, x, q, tr.running_cost});
    tr.running_cost += discount * w.weight * cost;
    discount *= w.rho;
    x = wrap_point({x[0] - q[0] * cfg.dt, x[1] - q[1] * cfg.dt});
  }
  tr.samples.push_back({-static_cast<double>(steps) * cfg.dt, x, {0.0, 0.0}, tr.running_cost});
  tr.terminal_value = interpolate(v, x);
  tr.terminal_discount = discount;
  return tr;
}

ComparisonReport compare_fields(const GridField& sub, const GridField& sol, double tol) {
  if (!(sub.grid() == sol.grid())) {
    throw Error(ErrorCode::InvalidArgument, "discounted", "comparison of fields on different grids");
  }
  ComparisonReport r;
  r.worst_gap = -std::numeric_limits<double>::infinity();
  for (NodeIndex k = 0; k < sub.size(); ++k) {
    const double gap = sub[k] - sol[k];
    if (gap > r.worst_gap) {
      r.worst_gap = gap;
      r.worst_node = k;
    }
  }
  r.passed = r.worst_gap <= tol;
  return r;
}

ComparisonViolated::ComparisonViolated(ComparisonReport report)
    : Error(ErrorCode::ComparisonViolated, "discounted",
            [&] {
              std::ostringstream os;
              os << "subsolution exceeds solution by " << report.worst_gap << " at node " << report.worst_node;
              return os.str();
            }()),
      report_(report) {}

ComparisonReport comparison_check(const GridField& sub, const GridField& sol, double tol) {
  auto r = compare_fields(sub, sol, tol);
  if (!r.passed) throw ComparisonViolated(r);
  return r;
}

}  // namespace hjsys
