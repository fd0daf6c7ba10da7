#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "hjsys/coupling.hpp"
#include "hjsys/error.hpp"

using namespace hjsys;

namespace {

ErrorCode code_of(const std::vector<std::vector<double>>& a) {
  try {
    CouplingMatrix::validate(a);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("validate accepted an invalid matrix");
  return ErrorCode::InvalidArgument;
}

// Irreducible by construction: a cycle 0 -> 1 -> ... -> 0 plus random extra edges.
std::vector<std::vector<double>> random_coupling(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> w(0.1, 3.0), coin(0.0, 1.0);
  std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    a[i][(i + 1) % m] = -w(rng);
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i && j != (i + 1) % m && coin(rng) < 0.4) a[i][j] = -w(rng);
    }
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) s += a[i][j];
    a[i][i] = -s;
  }
  return a;
}

// Stationary law of the jump chain P = I - A / lambda, by power iteration.
std::vector<double> power_iteration(const std::vector<std::vector<double>>& a) {
  const std::size_t m = a.size();
  double lambda = 0.0;
  for (std::size_t i = 0; i < m; ++i) lambda = std::max(lambda, a[i][i]);
  lambda *= 2.0;
  std::vector<double> o(m, 1.0 / m), next(m);
  for (int it = 0; it < 200000; ++it) {
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += o[i] * ((i == j ? 1.0 : 0.0) - a[i][j] / lambda);
      next[j] = s;
    }
    double diff = 0.0;
    for (std::size_t j = 0; j < m; ++j) diff = std::max(diff, std::fabs(next[j] - o[j]));
    o.swap(next);
    if (diff < 1e-16) break;
  }
  return o;
}

}  // namespace

TEST_CASE("validate examples") {
  CHECK_NOTHROW(CouplingMatrix::validate({{1, -1}, {-1, 1}}));
  CHECK(code_of({{1, -1}, {0, 0}}) == ErrorCode::Reducible);
  CHECK(code_of({{1, -2}, {-1, 1}}) == ErrorCode::RowSumNonzero);
  CHECK(code_of({{-1, 1}, {-1, 1}}) == ErrorCode::OffDiagonalPositive);
  CHECK(code_of({{1, -1, 0}, {-1, 1, 0}, {0, -1, 1}}) == ErrorCode::Reducible);
  CHECK(code_of({{1, -1}}) == ErrorCode::InvalidArgument);
  CHECK(code_of({}) == ErrorCode::InvalidArgument);
  CHECK(code_of({{0.5}}) == ErrorCode::RowSumNonzero);
  CHECK_NOTHROW(CouplingMatrix::validate({{0.0}}));
}

TEST_CASE("equilibrium distribution examples") {
  auto o = equilibrium_distribution(CouplingMatrix::validate({{1, -1}, {-1, 1}})).o;
  CHECK(o[0] == doctest::Approx(0.5));
  CHECK(o[1] == doctest::Approx(0.5));
  o = equilibrium_distribution(CouplingMatrix::validate({{2, -2}, {-1, 1}})).o;
  CHECK(o[0] == doctest::Approx(1.0 / 3.0));
  CHECK(o[1] == doctest::Approx(2.0 / 3.0));
  o = equilibrium_distribution(CouplingMatrix::validate({{0.0}})).o;
  REQUIRE(o.size() == 1);
  CHECK(o[0] == 1.0);
}

TEST_CASE("random couplings: kernel, o-conditions and an independent oracle") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 2 + t % 5;
    const auto rows = random_coupling(rng, m);
    const auto a = CouplingMatrix::validate(rows);
    std::vector<double> ones(m, 1.0);
    for (std::size_t i = 0; i < m; ++i) CHECK(std::fabs(a.row_dot(i, ones.data())) <= 1e-12);

    const auto o = equilibrium_distribution(a).o;
    CHECK(std::fabs(std::accumulate(o.begin(), o.end(), 0.0) - 1.0) <= 1e-10);
    CHECK(*std::min_element(o.begin(), o.end()) > 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += o[i] * a(i, j);
      CHECK(std::fabs(s) <= 1e-10);
    }
    if (t % 20 == 0) {
      const auto ref = power_iteration(rows);
      for (std::size_t i = 0; i < m; ++i) CHECK(std::fabs(ref[i] - o[i]) <= 1e-9);
    }
  }
}

TEST_CASE("permuting the coupling permutes o") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 3 + t % 3;
    const auto rows = random_coupling(rng, m);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> pr(m, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) pr[i][j] = rows[perm[i]][perm[j]];
    const auto o = equilibrium_distribution(CouplingMatrix::validate(rows)).o;
    const auto op = equilibrium_distribution(CouplingMatrix::validate(pr)).o;
    for (std::size_t i = 0; i < m; ++i) CHECK(std::fabs(op[i] - o[perm[i]]) <= 1e-12);
  }
}
