#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace hjsys;
using testing::cosine;
using testing::mechanical;

namespace {

DiscountedProblem constant_problem(const TorusGrid& g, double a, double f, TrigPotential v = TrigPotential(0.0)) {
  return DiscountedProblem{0, a, mechanical(std::move(v)), GridField(g, f)};
}

SolverConfig config(double dt, double q = 3.0) {
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.speed_bound = q;
  return cfg;
}

GridField random_field(const TorusGrid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  GridField f(g);
  for (NodeIndex k = 0; k < g.size(); ++k) f[k] = u(rng);
  return f;
}

}  // namespace

TEST_CASE("velocity candidates") {
  SolverConfig cfg = config(0.01, 2.0);
  cfg.candidates_per_axis = 5;
  cfg.refinement_levels = 3;
  const auto c1 = velocity_candidates(1, cfg);
  CHECK(c1.size() == 11);
  CHECK(std::is_sorted(c1.begin(), c1.end(), [](const Vec& a, const Vec& b) { return a[0] < b[0]; }));
  CHECK(std::count_if(c1.begin(), c1.end(), [](const Vec& a) { return a[0] == 0.0; }) == 1);
  CHECK(c1.front()[0] == -2.0);
  CHECK(c1.back()[0] == 2.0);
  // dq = 1, so the finest refinement is 1/8.
  CHECK(std::any_of(c1.begin(), c1.end(), [](const Vec& a) { return a[0] == 0.125; }));
  const auto c2 = velocity_candidates(2, cfg);
  CHECK(c2.size() == 121);
  for (const auto& q : c2) CHECK(std::max(std::fabs(q[0]), std::fabs(q[1])) <= 2.0);
}

TEST_CASE("solver configuration is checked") {
  SolverConfig cfg = config(0.01);
  CHECK_NOTHROW(cfg.check());
  cfg.candidates_per_axis = 4;
  CHECK_THROWS_AS(cfg.check(), Error);
  cfg = config(-1.0);
  CHECK_THROWS_AS(cfg.check(), Error);
  cfg = config(0.2, 3.0);
  CHECK_THROWS_AS(cfg.check(), Error);
}

TEST_CASE("discount weights") {
  const auto w = discount_weights(1.0, 0.1);
  CHECK(w.rho == doctest::Approx(std::exp(-0.1)));
  CHECK(w.weight == doctest::Approx(1.0 - std::exp(-0.1)));
  const auto z = discount_weights(0.0, 0.1);
  CHECK(z.rho == 1.0);
  CHECK(z.weight == 0.1);
}

TEST_CASE("bellman_update examples") {
  TorusGrid g(1, 32);
  const auto prob = constant_problem(g, 1.0, 3.0);
  const auto cfg = config(0.1, 2.0);
  const auto fixed = bellman_update(GridField(g, 3.0), prob, cfg);
  CHECK(sup_distance(fixed, GridField(g, 3.0)) <= 1e-14);
  const auto one = bellman_update(GridField(g, 0.0), prob, cfg);
  for (NodeIndex k = 0; k < g.size(); ++k) CHECK(one[k] == doctest::Approx(3.0 * (1.0 - std::exp(-0.1))));
  CHECK(one[0] == doctest::Approx(0.2855).epsilon(1e-3));
  const auto up = bellman_update(GridField(g, 1.0), prob, cfg);
  for (NodeIndex k = 0; k < g.size(); ++k) CHECK(one[k] <= up[k]);
}

TEST_CASE("bellman operator is monotone and a rho-contraction") {
  std::mt19937_64 rng(21);
  for (int dim : {1, 2}) {
    TorusGrid g(dim, dim == 1 ? 64 : 16);
    DiscountedProblem prob{0, 0.7, mechanical(TrigPotential(0.0, {TrigMode{{1, 1}, 1.0, 0.2}})),
                           GridField::sample(g, [](const Vec& x) { return std::sin(testing::kTwoPi * x[0]); })};
    const auto cfg = config(0.5 / g.n(), 2.0);
    const double rho = discount_weights(prob.discount, cfg.dt).rho;
    for (int t = 0; t < 10; ++t) {
      const auto v = random_field(g, rng, -1.0, 1.0);
      const auto w = random_field(g, rng, -1.0, 1.0);
      const auto tv = bellman_update(v, prob, cfg);
      const auto tw = bellman_update(w, prob, cfg);
      CHECK(sup_distance(tv, tw) <= rho * sup_distance(v, w) + 1e-14);
      GridField hi(g);
      for (NodeIndex k = 0; k < g.size(); ++k) hi[k] = std::max(v[k], w[k]);
      const auto th = bellman_update(hi, prob, cfg);
      for (NodeIndex k = 0; k < g.size(); ++k) CHECK(th[k] >= std::max(tv[k], tw[k]) - 1e-14);
    }
  }
}

TEST_CASE("solve_discounted on constant data") {
  TorusGrid g(1, 32);
  for (double a : {0.3, 1.0, 4.0}) {
    const auto sol = solve_discounted(constant_problem(g, a, 2.0), config(0.01));
    CHECK(sol.value.min() == doctest::Approx(2.0 / a));
    CHECK(sol.value.max() == doctest::Approx(2.0 / a));
  }
}

TEST_CASE("discounted value vanishes at the potential maximum") {
  // L + f = q^2/2 - cos(2 pi x) + 1 >= 0, and staying at x = 0 costs nothing.
  TorusGrid g(1, 128);
  DiscountedProblem prob{0, 1.0, mechanical(cosine()), GridField(g, 1.0)};
  const auto sol = solve_discounted(prob, config(0.5 / 128, 3.0));
  CHECK(std::fabs(sol.value[0]) <= 1e-9);
  CHECK(sol.value.min() >= -1e-9);
  CHECK(sol.value[64] > 0.1);
}

TEST_CASE("fixed point does not depend on the start") {
  TorusGrid g(1, 64);
  DiscountedProblem prob{0, 1.0, mechanical(cosine()), GridField(g, 1.0)};
  auto cfg = config(0.5 / 64, 3.0);
  cfg.fp_tolerance = 1e-10;
  const auto a = solve_discounted(prob, cfg, GridField(g, 0.0));
  const auto b = solve_discounted(prob, cfg, GridField(g, 100.0));
  CHECK(sup_distance(a.value, b.value) <= 1e-6);
}

TEST_CASE("adding c to the source shifts the solution by c / a") {
  TorusGrid g(1, 64);
  const double a = 0.8;
  DiscountedProblem prob{0, a, mechanical(cosine()),
                         GridField::sample(g, [](const Vec& x) { return 0.3 * std::sin(testing::kTwoPi * x[0]); })};
  auto cfg = config(0.5 / 64, 3.0);
  cfg.fp_tolerance = 1e-12;
  const auto base = solve_discounted(prob, cfg);
  prob.source = prob.source + 1.0;
  const auto shifted = solve_discounted(prob, cfg);
  CHECK(sup_distance(shifted.value, base.value + 1.0 / a) <= 1e-8);
}

TEST_CASE("explicit and locally implicit sweeps share the fixed point") {
  TorusGrid g(1, 64);
  DiscountedProblem prob{0, 1.0, mechanical(cosine()), GridField(g, 1.0)};
  auto cfg = config(0.5 / 64, 3.0);
  cfg.fp_tolerance = 1e-12;
  cfg.max_iterations = 1000000;
  const auto imp = solve_discounted(prob, cfg);
  cfg.scheme = UpdateScheme::Explicit;
  const auto exp = solve_discounted(prob, cfg);
  CHECK(sup_distance(imp.value, exp.value) <= 1e-8);
  CHECK(imp.iterations < exp.iterations);
  CHECK(imp.bellman_residual <= 1e-10);
}

TEST_CASE("iteration budget is enforced") {
  TorusGrid g(1, 32);
  DiscountedProblem prob{0, 1.0, mechanical(cosine()), GridField(g, 1.0)};
  auto cfg = config(0.01);
  cfg.max_iterations = 2;
  try {
    solve_discounted(prob, cfg, GridField(g, 50.0));
    FAIL("expected MaxIterationsExceeded");
  } catch (const MaxIterationsExceeded& e) {
    CHECK(e.code() == ErrorCode::MaxIterationsExceeded);
    CHECK(e.iterations() == 2);
    CHECK(e.last_increment() > 0.0);
  }
  CHECK_THROWS_AS(solve_discounted(DiscountedProblem{0, 0.0, mechanical(cosine()), GridField(g, 1.0)}, cfg), Error);
}

TEST_CASE("trajectories") {
  TorusGrid g(1, 256);
  DiscountedProblem prob{0, 1.0, mechanical(cosine()), GridField(g, 1.0)};
  const auto cfg = config(0.05, 3.0);
  const auto v = solve_discounted(prob, cfg).value;

  SUBCASE("stationary at the equilibrium") {
    const auto tr = extract_trajectory(v, prob, cfg, {0.0, 0.0}, 5.0);
    for (const auto& s : tr.samples) {
      CHECK(s.velocity[0] == 0.0);
      CHECK(s.point[0] == 0.0);
    }
    CHECK(tr.value_gap() <= 1e-12);
  }
  SUBCASE("zero horizon") {
    const auto tr = extract_trajectory(v, prob, cfg, {0.3, 0.0}, 0.0);
    CHECK(tr.samples.size() == 1);
    CHECK(tr.running_cost == 0.0);
    CHECK(tr.value_gap() == 0.0);
  }
  SUBCASE("value consistency at random starts") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
      const auto tr = extract_trajectory(v, prob, cfg, {u(rng), 0.0}, 20.0);
      CHECK(tr.value_gap() <= 1e-2);
      CHECK(tr.samples.size() == 401);
      CHECK(tr.samples.back().cost == tr.running_cost);
    }
  }
  SUBCASE("flat data gives stationary paths with cost c (1 - e^{-aT}) / a") {
    const auto flat = constant_problem(g, 0.5, 2.0);
    const auto vf = solve_discounted(flat, cfg).value;
    const auto tr = extract_trajectory(vf, flat, cfg, {0.4, 0.0}, 20.0);
    CHECK(tr.samples.back().point[0] == doctest::Approx(0.4));
    CHECK(tr.running_cost == doctest::Approx(2.0 * (1.0 - std::exp(-0.5 * 20.0)) / 0.5));
  }
}

TEST_CASE("comparison check") {
  TorusGrid g(1, 16);
  const auto sol = GridField::sample(g, [](const Vec& x) { return std::cos(testing::kTwoPi * x[0]); });
  CHECK(comparison_check(sol - 1.0, sol, 0.0).passed);
  try {
    comparison_check(sol + 1.0, sol, 1e-9);
    FAIL("expected ComparisonViolated");
  } catch (const ComparisonViolated& e) {
    CHECK(e.report().worst_gap == doctest::Approx(1.0));
    CHECK_FALSE(e.report().passed);
  }
  const auto r = compare_fields(sol + 1.0, sol, 0.0);
  CHECK_FALSE(r.passed);
}
