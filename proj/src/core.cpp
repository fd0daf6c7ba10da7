#include "hjsys/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "hjsys/error.hpp"

namespace hjsys {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OffDiagonalPositive: return "OffDiagonalPositive";
    case ErrorCode::RowSumNonzero: return "RowSumNonzero";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NumericalRankDeficiency: return "NumericalRankDeficiency";
    case ErrorCode::EmptySublevel: return "EmptySublevel";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::ComparisonViolated: return "ComparisonViolated";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::LowerBoundViolated: return "LowerBoundViolated";
    case ErrorCode::SubsolutionConstructionFailed: return "SubsolutionConstructionFailed";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::RigidityViolated: return "RigidityViolated";
    case ErrorCode::InfeasibleLevel: return "InfeasibleLevel";
    case ErrorCode::IncompatibleTrace: return "IncompatibleTrace";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

TorusGrid::TorusGrid(int dim, int nodes_per_axis) : dim_(dim), n_(nodes_per_axis) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorCode::InvalidArgument, "core", "grid dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (nodes_per_axis < 8) {
    throw Error(ErrorCode::InvalidArgument, "core",
                "grid needs at least 8 nodes per axis, got " + std::to_string(nodes_per_axis));
  }
  h_ = 1.0 / n_;
  size_ = dim_ == 2 ? static_cast<std::size_t>(n_) * n_ : static_cast<std::size_t>(n_);
}

Vec TorusGrid::coords(NodeIndex node) const noexcept {
  const auto [i, j] = multi_index(node);
  return {i * h_, dim_ == 2 ? j * h_ : 0.0};
}

NodeIndex TorusGrid::shifted(NodeIndex node, int axis, int steps) const noexcept {
  auto idx = multi_index(node);
  idx[axis] += steps;
  return flat(idx[0], idx[1]);
}

NodeIndex TorusGrid::nearest(const Vec& x) const noexcept {
  const Vec y = wrap_point(x);
  const int i = static_cast<int>(std::lround(y[0] * n_));
  const int j = dim_ == 2 ? static_cast<int>(std::lround(y[1] * n_)) : 0;
  return flat(i, j);
}

double TorusGrid::torus_distance(const Vec& a, const Vec& b) const noexcept {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) {
    double d = std::fabs(a[k] - b[k]);
    d -= std::floor(d);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

Vec wrap_point(const Vec& x) noexcept {
  Vec y = x;
  for (double& c : y) {
    c -= std::floor(c);
    if (c >= 1.0) c = 0.0;  // floor rounding on values just below an integer
  }
  return y;
}

GridField::GridField(const TorusGrid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

GridField::GridField(const TorusGrid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::InvalidArgument, "core",
                "field has " + std::to_string(values_.size()) + " values for a grid of " +
                    std::to_string(grid_.size()) + " nodes");
  }
}

double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool GridField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b)) throw Error(ErrorCode::InvalidArgument, "core", "fields live on different grids");
}

template <class Op>
GridField zip(const GridField& a, const GridField& b, Op op) {
  require_same_grid(a.grid(), b.grid());
  GridField out(a.grid());
  for (NodeIndex k = 0; k < a.size(); ++k) out[k] = op(a[k], b[k]);
  return out;
}

}  // namespace

GridField operator+(const GridField& a, const GridField& b) { return zip(a, b, std::plus<>{}); }
GridField operator-(const GridField& a, const GridField& b) { return zip(a, b, std::minus<>{}); }

GridField operator+(const GridField& a, double c) {
  GridField out = a;
  for (double& v : out.values()) v += c;
  return out;
}

GridField operator-(const GridField& a, double c) { return a + (-c); }

GridField operator*(double c, const GridField& a) {
  GridField out = a;
  for (double& v : out.values()) v *= c;
  return out;
}

double sup_distance(const GridField& a, const GridField& b) {
  require_same_grid(a.grid(), b.grid());
  double d = 0.0;
  for (NodeIndex k = 0; k < a.size(); ++k) d = std::max(d, std::fabs(a[k] - b[k]));
  return d;
}

VectorField::VectorField(std::vector<GridField> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorCode::InvalidArgument, "core", "vector field needs m >= 1");
  for (const auto& c : components_) require_same_grid(c.grid(), components_.front().grid());
}

VectorField::VectorField(const TorusGrid& grid, std::size_t m, double fill)
    : components_(m, GridField(grid, fill)) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "core", "vector field needs m >= 1");
}

double sup_distance(const VectorField& a, const VectorField& b) {
  if (a.m() != b.m()) throw Error(ErrorCode::InvalidArgument, "core", "vector fields differ in m");
  double d = 0.0;
  for (std::size_t i = 0; i < a.m(); ++i) d = std::max(d, sup_distance(a[i], b[i]));
  return d;
}

double interpolate(const GridField& field, const Vec& x) {
  const TorusGrid& g = field.grid();
  const int n = g.n();
  const Vec y = wrap_point(x);

  int base[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  for (int k = 0; k < g.dim(); ++k) {
    const double s = y[k] * n;
    const double fl = std::floor(s);
    base[k] = static_cast<int>(fl);
    frac[k] = s - fl;
  }

  if (g.dim() == 1) {
    const double a = field[g.flat(base[0])];
    const double b = field[g.flat(base[0] + 1)];
    return (1.0 - frac[0]) * a + frac[0] * b;
  }
  const double v00 = field[g.flat(base[0], base[1])];
  const double v10 = field[g.flat(base[0] + 1, base[1])];
  const double v01 = field[g.flat(base[0], base[1] + 1)];
  const double v11 = field[g.flat(base[0] + 1, base[1] + 1)];
  return (1.0 - frac[1]) * ((1.0 - frac[0]) * v00 + frac[0] * v10) +
         frac[1] * ((1.0 - frac[0]) * v01 + frac[0] * v11);
}

Vec discrete_gradient(const GridField& field, NodeIndex node) {
  const TorusGrid& g = field.grid();
  Vec grad{0.0, 0.0};
  for (int axis = 0; axis < g.dim(); ++axis) {
    grad[axis] = (field[g.shifted(node, axis, 1)] - field[g.shifted(node, axis, -1)]) / (2.0 * g.spacing());
  }
  return grad;
}

OneSided one_sided_gradients(const GridField& field, NodeIndex node) {
  const TorusGrid& g = field.grid();
  OneSided out{{0.0, 0.0}, {0.0, 0.0}};
  for (int axis = 0; axis < g.dim(); ++axis) {
    out.forward[axis] = (field[g.shifted(node, axis, 1)] - field[node]) / g.spacing();
    out.backward[axis] = (field[node] - field[g.shifted(node, axis, -1)]) / g.spacing();
  }
  return out;
}

}  // namespace hjsys
