#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "hjsys/diagnostics.hpp"
#include "hjsys/eikonal.hpp"

using namespace hjsys;
using namespace testing;

namespace {

// S_1(0, x) for V = cos(2 pi x): the integral of 2 |sin(pi s)| from 0 to the torus distance.
double cosine_distance(double x) {
  const double d = std::min(x, 1.0 - x);
  return 2.0 / std::numbers::pi * (1.0 - std::cos(std::numbers::pi * d));
}

EffectiveHamiltonian scalar(const TrigPotential& v, const TorusGrid& g) {
  return effective_hamiltonian(mechanical(v), g);
}

}  // namespace

TEST_CASE("constant metric distances") {
  TorusGrid g1(1, 64);
  const IntrinsicMetricGraph m1(scalar(TrigPotential(0.0), g1), 0.5);
  const auto d1 = intrinsic_distance(m1, 0);
  CHECK(d1[16] == doctest::Approx(0.25));
  CHECK(d1[48] == doctest::Approx(0.25));
  CHECK(m1.degree() == 2);

  TorusGrid g2(2, 32);
  const IntrinsicMetricGraph m2(scalar(TrigPotential(0.0), g2), 2.0);
  const auto d2 = intrinsic_distance(m2, 0);
  CHECK(m2.degree() == 8);
  CHECK(d2[g2.flat(8, 0)] == doctest::Approx(2.0 * 0.25));
  CHECK(d2[g2.flat(8, 8)] == doctest::Approx(2.0 * 0.25 * std::sqrt(2.0)));
}

TEST_CASE("scalar critical value and Aubry set") {
  TorusGrid g(1, 64);
  CHECK(scalar_critical_value(scalar(cosine(), g)) == doctest::Approx(1.0));
  CHECK(scalar_critical_value(scalar(TrigPotential(0.0), g)) == 0.0);
  CHECK(scalar_aubry(scalar(cosine(), g), 1.0, 1e-9) == std::vector<NodeIndex>{0});
  CHECK(scalar_aubry(scalar(TrigPotential(0.0), g), 0.0, 1e-9).size() == 64);
}

TEST_CASE("effective Hamiltonian of a system field") {
  const auto sys = asymmetric_pair(32);
  VectorField u(sys.grid(), 2, 0.0);
  u[1] = u[1] + 0.25;
  const auto eff = effective_hamiltonian(sys, 0, u);
  for (NodeIndex k = 0; k < 32; ++k) CHECK(eff.shift[k] == doctest::Approx(-0.25));
  CHECK(eff.min_over_p(0) == doctest::Approx(0.75));
}

TEST_CASE("distance on the cosine problem approaches the closed form") {
  double prev = 1e300;
  for (int n : {128, 256, 512}) {
    TorusGrid g(1, n);
    const IntrinsicMetricGraph m(scalar(cosine(), g), 1.0);
    const auto d = intrinsic_distance(m, 0);
    const double err = std::fabs(d[n / 2] - 2.0 / std::numbers::pi);
    CHECK(err < prev);
    prev = err;
    double worst = 0.0;
    for (NodeIndex k = 0; k < g.size(); ++k) worst = std::max(worst, std::fabs(d[k] - cosine_distance(g.coords(k)[0])));
    CHECK(worst <= 0.02);
  }
  CHECK(prev <= 0.02);
}

TEST_CASE("triangle inequality on random triples") {
  for (int dim : {1, 2}) {
    TorusGrid g(dim, dim == 1 ? 128 : 24);
    const IntrinsicMetricGraph m(scalar(TrigPotential(0.0, {TrigMode{{1, 1}, 1.0, 0.0}}), g), 1.0);
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<NodeIndex> pick(0, g.size() - 1);
    std::vector<GridField> from;
    std::vector<NodeIndex> sources;
    for (int s = 0; s < 8; ++s) {
      sources.push_back(pick(rng));
      from.push_back(intrinsic_distance(m, sources.back()));
    }
    for (int t = 0; t < 300; ++t) {
      const std::size_t a = t % 8, b = (t / 8) % 8;
      const NodeIndex z = pick(rng);
      CHECK(from[a][z] <= from[a][sources[b]] + from[b][z]);
    }
  }
}

TEST_CASE("infeasible levels are rejected") {
  TorusGrid g(1, 32);
  const IntrinsicMetricGraph m(scalar(cosine(), g), 0.5);
  CHECK_FALSE(m.infeasible().empty());
  try {
    intrinsic_distance(m, 16);
    FAIL("expected InfeasibleLevel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InfeasibleLevel);
  }
}

TEST_CASE("maximal subsolution examples") {
  TorusGrid g(1, 512);
  const IntrinsicMetricGraph m(scalar(cosine(), g), 1.0);
  const auto u = maximal_subsolution(m, {0}, {0.0});
  CHECK(std::fabs(u[256] - 2.0 / std::numbers::pi) <= 0.02);

  // A full trace of a known subsolution comes back unchanged.
  const GridField full(g, 0.3);
  std::vector<NodeIndex> nodes(g.size());
  std::vector<double> values(g.size());
  for (NodeIndex k = 0; k < g.size(); ++k) {
    nodes[k] = k;
    values[k] = u[k];
  }
  CHECK(sup_distance(maximal_subsolution(m, nodes, values), u) == 0.0);
  for (NodeIndex k = 0; k < g.size(); ++k) values[k] = full[k];
  CHECK(sup_distance(maximal_subsolution(m, nodes, values), full) == 0.0);

  try {
    maximal_subsolution(m, {0, 256}, {0.0, 10.0});
    FAIL("expected IncompatibleTrace");
  } catch (const IncompatibleTrace& e) {
    CHECK(e.from() == 0);
    CHECK(e.to() == 256);
    CHECK(e.gap() == doctest::Approx(10.0 - 2.0 / std::numbers::pi).epsilon(0.01));
  }
}

TEST_CASE("metric subsolution check") {
  TorusGrid g(1, 128);
  const IntrinsicMetricGraph m(scalar(cosine(), g), 1.0);
  const auto c = metric_subsolution_check(GridField(g, 4.0), m, 200);
  CHECK(c.passed());
  CHECK(c.edges_checked == 256);
  CHECK(c.pairs_checked == 200);
  CHECK(c.seed == 20240601);

  const auto u = maximal_subsolution(m, {0}, {0.0});
  CHECK(metric_subsolution_check(u, m, 500).passed());

  const auto bad = GridField::sample(g, [](const Vec& x) { return 10.0 * std::sin(testing::kTwoPi * x[0]); });
  const auto r = metric_subsolution_check(bad, m, 200);
  CHECK_FALSE(r.passed());
  CHECK(r.edge_violations > 0);
  CHECK(r.worst_gap > 0.0);
  CHECK_FALSE(r.violations.empty());
}

TEST_CASE("distance functions have superdifferentials away from the source") {
  TorusGrid g(1, 256);
  const IntrinsicMetricGraph m(scalar(cosine(), g), 1.0);
  const auto d = intrinsic_distance(m, 0);
  std::vector<NodeIndex> nodes;
  for (NodeIndex k = 5; k < g.size(); k += 25) nodes.push_back(k);
  CHECK(superdifferential_probe(d, nodes).all_passed());
}
