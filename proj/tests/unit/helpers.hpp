#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hjsys/critical.hpp"
#include "hjsys/discounted.hpp"
#include "hjsys/hamiltonian.hpp"

namespace testing {

using namespace hjsys;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// V(x) = amplitude cos(2 pi k x) in 1D.
inline TrigPotential cosine(int k = 1, double amplitude = 1.0, double phase = 0.0) {
  return TrigPotential(0.0, {TrigMode{{k, 0}, amplitude, phase}});
}

inline HamiltonianComponent mechanical(TrigPotential v, double c0 = 1.0) { return {c0, std::move(v)}; }

inline SystemProblem scalar_cosine(int n) {
  return SystemProblem(TorusGrid(1, n), {mechanical(cosine())}, CouplingMatrix::validate({{0.0}}));
}

inline SystemProblem flat_system(int n, std::size_t m) {
  std::vector<HamiltonianComponent> comps(m, mechanical(TrigPotential(0.0)));
  std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
  if (m > 1) {
    for (std::size_t i = 0; i < m; ++i) {
      a[i][i] = 1.0;
      a[i][(i + 1) % m] -= 1.0;
    }
  }
  return SystemProblem(TorusGrid(1, n), comps, CouplingMatrix::validate(a));
}

inline SystemProblem symmetric_pair(int n) {
  return SystemProblem(TorusGrid(1, n), {mechanical(cosine()), mechanical(cosine())},
                       CouplingMatrix::validate({{1.0, -1.0}, {-1.0, 1.0}}));
}

inline SystemProblem asymmetric_pair(int n) {
  return SystemProblem(TorusGrid(1, n), {mechanical(cosine()), mechanical(TrigPotential(0.0))},
                       CouplingMatrix::validate({{1.0, -1.0}, {-1.0, 1.0}}));
}

inline SystemProblem two_well(int n) {
  return SystemProblem(TorusGrid(1, n), {mechanical(cosine(2)), mechanical(TrigPotential(0.0))},
                       CouplingMatrix::validate({{1.0, -1.0}, {-1.0, 1.0}}));
}

inline SolverConfig auto_config(const SystemProblem& sys) {
  SolverConfig cfg;
  cfg.dt = auto_time_step(sys.grid());
  cfg.speed_bound = auto_speed_bound(sys);
  return cfg;
}

// Torus distance from x to 0.5 in 1D.
inline double distance_to_half(double x) { return std::fabs(x - 0.5); }

inline std::string problem_path(const std::string& name) { return std::string(HJSYS_PROBLEM_DIR) + "/" + name; }

}  // namespace testing
