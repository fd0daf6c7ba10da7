#include "hjsys/coupling.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "hjsys/error.hpp"

namespace hjsys {

namespace {

constexpr double kRowSumTolerance = 1e-12;

// Nodes reachable from node 0 following i -> j when a_ij < 0 (or j -> i when reversed).
std::vector<bool> reachable(std::size_t m, const std::vector<double>& a, bool reversed) {
  std::vector<bool> seen(m, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i || seen[j]) continue;
      const double w = reversed ? a[j * m + i] : a[i * m + j];
      if (w < 0.0) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

}  // namespace

CouplingMatrix CouplingMatrix::validate(const std::vector<std::vector<double>>& entries) {
  const std::size_t m = entries.size();
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "coupling", "coupling matrix is empty");
  std::vector<double> a(m * m);
  double scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (entries[i].size() != m) {
      throw Error(ErrorCode::InvalidArgument, "coupling",
                  "coupling matrix is not square: row " + std::to_string(i) + " has " +
                      std::to_string(entries[i].size()) + " entries, expected " + std::to_string(m));
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double v = entries[i][j];
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, "coupling",
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
      }
      a[i * m + j] = v;
      scale = std::max(scale, std::fabs(v));
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && a[i * m + j] > 0.0) {
        std::ostringstream os;
        os << "off-diagonal entry a(" << i << "," << j << ") = " << a[i * m + j] << " is positive";
        throw Error(ErrorCode::OffDiagonalPositive, "coupling", os.str());
      }
    }
  }

  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += a[i * m + j];
    if (std::fabs(s) > kRowSumTolerance * scale) {
      std::ostringstream os;
      os << "row " << i << " sums to " << s << ", expected 0";
      throw Error(ErrorCode::RowSumNonzero, "coupling", os.str());
    }
  }

  if (m > 1) {
    const auto fwd = reachable(m, a, false);
    const auto bwd = reachable(m, a, true);
    for (std::size_t i = 0; i < m; ++i) {
      if (!fwd[i] || !bwd[i]) {
        std::ostringstream os;
        os << "coupling graph is not strongly connected: component " << i << " is "
           << (!fwd[i] ? "unreachable from" : "unable to reach") << " component 0";
        throw Error(ErrorCode::Reducible, "coupling", os.str());
      }
    }
    // Zero row sums plus a negative off-diagonal entry in every row.
    for (std::size_t i = 0; i < m; ++i) {
      if (!(a[i * m + i] > 0.0)) {
        throw Error(ErrorCode::Reducible, "coupling",
                    "diagonal entry a(" + std::to_string(i) + "," + std::to_string(i) + ") is not positive");
      }
    }
  }

  return CouplingMatrix(m, std::move(a));
}

std::vector<std::vector<double>> CouplingMatrix::rows() const {
  std::vector<std::vector<double>> out(m_, std::vector<double>(m_));
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t j = 0; j < m_; ++j) out[i][j] = a_[i * m_ + j];
  return out;
}

EquilibriumDistribution equilibrium_distribution(const CouplingMatrix& a) {
  const std::size_t m = a.m();
  if (m == 1) return {{1.0}};

  // Rows 0..m-2: (A^T o)_j = 0 for the first m-1 columns of A; last row: sum o = 1.
  Eigen::MatrixXd sys(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j + 1 < m; ++j)
    for (std::size_t i = 0; i < m; ++i) sys(j, i) = a(i, j);
  sys.row(m - 1).setOnes();
  rhs(m - 1) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  lu.setThreshold(1e-12);
  if (lu.rank() < static_cast<Eigen::Index>(m)) {
    throw Error(ErrorCode::NumericalRankDeficiency, "coupling",
                "equilibrium system has rank " + std::to_string(lu.rank()) + " < " + std::to_string(m));
  }
  const Eigen::VectorXd sol = lu.solve(rhs);

  EquilibriumDistribution out;
  out.o.assign(sol.data(), sol.data() + m);
  for (double v : out.o) {
    if (!(v > 0.0)) {
      throw Error(ErrorCode::NumericalRankDeficiency, "coupling",
                  "equilibrium distribution has a non-positive component; the matrix is not a valid coupling");
    }
  }
  return out;
}

}  // namespace hjsys
