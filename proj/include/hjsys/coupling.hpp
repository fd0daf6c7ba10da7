#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace hjsys {

// m x m coupling matrix satisfying
//   a_ij <= 0 for i != j, zero row sums, and irreducibility
// (the graph with an edge i -> j whenever a_ij < 0 is strongly connected).
// m = 1 is admitted with A = [0]; it reduces the system to a scalar eikonal
// equation and is used as a test harness.
class CouplingMatrix {
 public:
  // Throws Error{OffDiagonalPositive | RowSumNonzero | Reducible | InvalidArgument}.
  static CouplingMatrix validate(const std::vector<std::vector<double>>& entries);

  std::size_t m() const noexcept { return m_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * m_ + j]; }

  // (A u)_i for a vector of component values at one node.
  double row_dot(std::size_t i, const double* u) const noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < m_; ++j) s += a_[i * m_ + j] * u[j];
    return s;
  }

  std::vector<std::vector<double>> rows() const;

 private:
  CouplingMatrix(std::size_t m, std::vector<double> a) : m_(m), a_(std::move(a)) {}

  std::size_t m_;
  std::vector<double> a_;
};

// The unique probability vector o with o A = 0.
struct EquilibriumDistribution {
  std::vector<double> o;

  double dot(const std::vector<double>& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += o[i] * v[i];
    return s;
  }
};

// Throws Error{NumericalRankDeficiency} if the normalized system is singular.
EquilibriumDistribution equilibrium_distribution(const CouplingMatrix& a);

}  // namespace hjsys
