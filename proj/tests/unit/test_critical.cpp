#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace hjsys;
using namespace testing;

TEST_CASE("system problem bounds") {
  const auto sys = asymmetric_pair(64);
  CHECK(sys.m() == 2);
  CHECK(sys.equilibrium_level() == doctest::Approx(0.5));
  CHECK(sys.constant_level() == doctest::Approx(0.5));
  CHECK(auto_time_step(sys.grid()) == doctest::Approx(0.5 / 64));
  CHECK(auto_speed_bound(sys) >= 1.0);
  CHECK_THROWS_AS(SystemProblem(TorusGrid(1, 16), {mechanical(cosine())},
                                CouplingMatrix::validate({{1.0, -1.0}, {-1.0, 1.0}})),
                  Error);
}

TEST_CASE("component problem freezes the other components") {
  const auto sys = asymmetric_pair(32);
  VectorField u(sys.grid(), 2, 0.0);
  u[1] = GridField::sample(sys.grid(), [](const Vec& x) { return x[0]; });
  const auto p = component_problem(sys, 0, u, 0.7, 0.25);
  CHECK(p.discount == doctest::Approx(1.25));
  for (NodeIndex k = 0; k < sys.grid().size(); ++k) CHECK(p.source[k] == doctest::Approx(0.7 + u[1][k]));
}

TEST_CASE("estimate_beta examples") {
  SUBCASE("scalar cosine") {
    const auto sys = scalar_cosine(128);
    const auto est = estimate_beta(sys, auto_config(sys));
    CHECK(std::fabs(est.value - 1.0) <= 0.05);
    CHECK(est.per_delta.size() == 3);
    CHECK(est.equilibrium_certified);
  }
  SUBCASE("symmetric pair collapses to the scalar case") {
    const auto sys = symmetric_pair(128);
    const auto scal = scalar_cosine(128);
    const auto a = estimate_beta(sys, auto_config(sys));
    const auto b = estimate_beta(scal, auto_config(scal));
    CHECK(std::fabs(a.value - b.value) <= 0.01);
    CHECK(std::fabs(a.extrapolated - b.extrapolated) <= 0.01);
  }
  SUBCASE("asymmetric pair sits above o.V") {
    const auto sys = asymmetric_pair(128);
    const auto est = estimate_beta(sys, auto_config(sys));
    CHECK(est.value >= 0.5 - 1e-12);
    // Golden value: every V_i peaks at x = 0, so the bounds coincide.
    CHECK(est.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::fabs(est.extrapolated - 0.5) <= 0.05);
  }
  SUBCASE("per-delta estimates approach the limit") {
    const auto sys = scalar_cosine(128);
    const auto est = estimate_beta(sys, auto_config(sys));
    for (double b : est.per_delta) CHECK(b <= 1.0 + 1e-9);
    CHECK(std::fabs(est.per_delta.back() - 1.0) <= std::fabs(est.per_delta.front() - 1.0) + 1e-12);
  }
}

TEST_CASE("estimate_beta rejects bad inputs") {
  const auto sys = scalar_cosine(64);
  BetaOptions opt;
  opt.deltas = {0.05, 0.1};
  CHECK_THROWS_AS(estimate_beta(sys, auto_config(sys), opt), Error);
  opt.deltas = {};
  CHECK_THROWS_AS(estimate_beta(sys, auto_config(sys), opt), Error);
}

TEST_CASE("a heavily discounted estimate far below o.V raises LowerBoundViolated") {
  // The reference node sits at the minimum of V, so -delta u_delta(0) ~ V(0) = -1 for large delta.
  const SystemProblem sys(TorusGrid(1, 64), {mechanical(cosine(1, 1.0, std::numbers::pi))},
                          CouplingMatrix::validate({{0.0}}));
  BetaOptions opt;
  opt.deltas = {50.0};
  try {
    estimate_beta(sys, auto_config(sys), opt);
    FAIL("expected LowerBoundViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LowerBoundViolated);
  }
}

TEST_CASE("initial subsolutions") {
  for (auto guess : {InitialGuess::Constant, InitialGuess::VanishingDiscount}) {
    for (const auto& sys : {scalar_cosine(128), symmetric_pair(128), asymmetric_pair(128), two_well(128)}) {
      const auto cfg = auto_config(sys);
      const double beta = estimate_beta(sys, cfg).value;
      SubsolutionOptions opt;
      opt.guess = guess;
      const auto w = initial_subsolution(sys, beta, cfg, opt);
      CHECK(residual(w, sys, beta).max_signed_upwind <= opt.slack_tol);
      CHECK(subsolution_defect(w, sys, beta, cfg) <= 1e-9);
    }
  }
}

TEST_CASE("the zero field is a subsolution of the scalar cosine problem") {
  const auto sys = scalar_cosine(64);
  const auto cfg = auto_config(sys);
  const VectorField w(sys.grid(), 1, 0.0);
  CHECK(residual(w, sys, 1.0).max_signed_upwind <= 1e-12);
  CHECK(subsolution_defect(w, sys, 1.0, cfg) <= 1e-12);
  CHECK(subsolution_defect(w, sys, 0.5, cfg) > 0.0);
}

TEST_CASE("sweep examples") {
  SUBCASE("flat fixed point") {
    const auto sys = flat_system(64, 1);
    const VectorField v(sys.grid(), 1, 0.0);
    CHECK(sup_distance(sweep(v, sys, 0.0, auto_config(sys)), v) <= 1e-8);
  }
  SUBCASE("cosine from zero is pinned at the equilibrium") {
    const auto sys = scalar_cosine(128);
    const VectorField v(sys.grid(), 1, 0.0);
    const auto out = sweep(v, sys, 1.0, auto_config(sys));
    CHECK(out[0].min() >= -1e-9);
    CHECK(std::fabs(out[0][0]) <= 50e-6);
  }
  SUBCASE("symmetric data and start") {
    // Gauss-Seidel hands the second solve the updated first component, so a
    // single sweep is ordered rather than symmetric; symmetry returns in the limit.
    const auto sys = symmetric_pair(128);
    const VectorField v(sys.grid(), 2, 0.0);
    SweepStats stats;
    const auto out = sweep(v, sys, 1.0, auto_config(sys), &stats);
    CHECK(compare_fields(out[0], out[1], 1e-9).passed);
    CHECK(stats.inner_iterations.size() == 2);
    const auto h = run_algorithm(sys, 1.0, v, auto_config(sys));
    CHECK(sup_distance((*h.limit)[0], (*h.limit)[1]) <= 1e-6);
  }
}

TEST_CASE("sweep output dominates its input and agrees with a frozen solve") {
  const auto sys = symmetric_pair(128);
  const auto cfg = auto_config(sys);
  SubsolutionOptions opt;
  const auto w = initial_subsolution(sys, 1.0, cfg, opt);
  const auto out = sweep(w, sys, 1.0, cfg);
  for (std::size_t i = 0; i < 2; ++i) CHECK(compare_fields(w[i], out[i], 10 * cfg.fp_tolerance).passed);
  // Component 0 of the sweep is the discounted solution with w_1 frozen.
  const auto sol = solve_discounted(component_problem(sys, 0, w, 1.0), cfg, w[0]).value;
  CHECK(comparison_check(w[0], sol, 10 * cfg.fp_tolerance).passed);
  CHECK(sup_distance(sol, out[0]) <= 1e-6);
}

TEST_CASE("sweep preserves order on comparable pairs") {
  const auto sys = asymmetric_pair(64);
  const auto cfg = auto_config(sys);
  const double beta = 0.5;
  const auto base = initial_subsolution(sys, beta, cfg);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (int t = 0; t < 3; ++t) {
    VectorField hi = base;
    for (std::size_t i = 0; i < 2; ++i)
      for (NodeIndex k = 0; k < sys.grid().size(); ++k) hi[i][k] += u(rng);
    const auto lo_out = sweep(base, sys, beta, cfg);
    const auto hi_out = sweep(hi, sys, beta, cfg);
    for (std::size_t i = 0; i < 2; ++i) CHECK(compare_fields(lo_out[i], hi_out[i], 1e-7).passed);
  }
}

TEST_CASE("residual of exact and converged fields") {
  const auto flat = flat_system(64, 2);
  const auto r = residual(VectorField(flat.grid(), 2, 0.0), flat, 0.0);
  CHECK(r.solution_residual == 0.0);
  CHECK(r.max_per_component.size() == 2);

  double prev = 0.0;
  for (int n : {128, 256}) {
    const auto sys = scalar_cosine(n);
    const auto h = run_algorithm(sys, 1.0, VectorField(sys.grid(), 1, 0.0), auto_config(sys));
    const double res = h.residual->solution_residual;
    if (n == 256) {
      CHECK(res <= 0.05);
      CHECK(prev / res >= 1.7);
    }
    prev = res;
  }
}

TEST_CASE("run_algorithm on the scalar cosine problem") {
  const auto sys = scalar_cosine(128);
  const auto cfg = auto_config(sys);
  const auto h = run_algorithm(sys, 1.0, VectorField(sys.grid(), 1, 0.0), cfg);
  REQUIRE(h.converged);
  REQUIRE(h.limit.has_value());
  const auto& v = (*h.limit)[0];
  CHECK(std::fabs(v[0]) <= 50e-6);
  for (NodeIndex k = 1; k < sys.grid().size(); ++k) CHECK(v[k] > 0.0);
  CHECK(h.monotonicity_worst() >= -10 * cfg.fp_tolerance);
  CHECK(h.iterates.size() == h.sweeps() + 1);
  CHECK(h.beta_used == 1.0);
}

TEST_CASE("symmetric pair limit matches the scalar limit") {
  // On the diagonal the pair runs the scalar scheme with running-cost step
  // e^dt - 1 instead of dt, so the limits differ by about (dt / 2) max V and
  // the gap halves with h.
  double prev = 0.0;
  for (int n : {128, 256}) {
    const auto sys = symmetric_pair(n);
    const auto scal = scalar_cosine(n);
    const auto hs = run_algorithm(sys, 1.0, VectorField(sys.grid(), 2, 0.0), auto_config(sys));
    const auto h1 = run_algorithm(scal, 1.0, VectorField(scal.grid(), 1, 0.0), auto_config(scal));
    CHECK(sup_distance((*hs.limit)[0], (*hs.limit)[1]) <= 1e-6);
    const double dt = auto_time_step(sys.grid());
    const double gap = sup_distance((*hs.limit)[0], (*h1.limit)[0]);
    CHECK(gap <= 1e-4 + dt * (*h1.limit)[0].max());
    if (prev > 0.0) CHECK(prev / gap >= 1.8);
    prev = gap;
  }
}

TEST_CASE("sweep budget exhaustion carries the history") {
  const auto sys = asymmetric_pair(64);
  const auto cfg = auto_config(sys);
  const auto w0 = initial_subsolution(sys, 0.5, cfg);
  AlgorithmOptions opt;
  opt.max_sweeps = 1;
  opt.stop_tol = 1e-14;
  try {
    run_algorithm(sys, 0.5, w0, cfg, opt);
    FAIL("expected NotConverged");
  } catch (const NotConverged& e) {
    CHECK(e.code() == ErrorCode::NotConverged);
    CHECK(e.history().sweeps() == 1);
    CHECK_FALSE(e.history().converged);
  }
}

TEST_CASE("discounted system converges for every reference problem") {
  for (const auto& sys : {scalar_cosine(64), asymmetric_pair(64), two_well(64)}) {
    const auto sol = solve_discounted_system(sys, auto_config(sys), 0.1);
    CHECK(sol.passes > 0);
    for (const auto& c : sol.u) CHECK(c.all_finite());
  }
}
