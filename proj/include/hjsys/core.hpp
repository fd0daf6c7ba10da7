#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hjsys {

// Points, momenta and velocities live in R^dim with dim <= 2. Unused
// trailing coordinates are kept at zero so that dot products and norms
// can always run over both entries.
using Vec = std::array<double, 2>;
using NodeIndex = std::size_t;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm2(const Vec& a) { return dot(a, a); }

// Uniform periodic grid on the unit torus T^dim.
class TorusGrid {
 public:
  TorusGrid(int dim, int nodes_per_axis);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return size_; }

  // Axis multi-index <-> flat node index. Axis 0 varies fastest.
  std::array<int, 2> multi_index(NodeIndex node) const noexcept {
    return {static_cast<int>(node % n_), dim_ == 2 ? static_cast<int>(node / n_) : 0};
  }
  NodeIndex flat(int i, int j = 0) const noexcept {
    return static_cast<NodeIndex>(wrap(i)) + (dim_ == 2 ? static_cast<NodeIndex>(wrap(j)) * n_ : 0);
  }
  int wrap(int i) const noexcept {
    int r = i % n_;
    return r < 0 ? r + n_ : r;
  }

  Vec coords(NodeIndex node) const noexcept;
  // Node reached from `node` by moving `steps` cells along `axis`.
  NodeIndex shifted(NodeIndex node, int axis, int steps) const noexcept;
  // Nearest node to a point on the torus.
  NodeIndex nearest(const Vec& x) const noexcept;
  // Shortest periodic distance between two points.
  double torus_distance(const Vec& a, const Vec& b) const noexcept;

  bool operator==(const TorusGrid& other) const noexcept { return dim_ == other.dim_ && n_ == other.n_; }

 private:
  int dim_;
  int n_;
  double h_;
  std::size_t size_;
};

// Wraps every coordinate into [0, 1).
Vec wrap_point(const Vec& x) noexcept;

class GridField {
 public:
  explicit GridField(const TorusGrid& grid, double fill = 0.0);
  GridField(const TorusGrid& grid, std::vector<double> values);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](NodeIndex k) const noexcept { return values_[k]; }
  double& operator[](NodeIndex k) noexcept { return values_[k]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double min() const;
  double max() const;
  bool all_finite() const;

  template <class F>
  static GridField sample(const TorusGrid& grid, F&& f) {
    GridField out(grid);
    for (NodeIndex k = 0; k < grid.size(); ++k) out[k] = f(grid.coords(k));
    return out;
  }

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

GridField operator+(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField operator+(const GridField& a, double c);
GridField operator-(const GridField& a, double c);
GridField operator*(double c, const GridField& a);

// max_k |a[k] - b[k]|
double sup_distance(const GridField& a, const GridField& b);

// A candidate (sub)solution u = (u_1, ..., u_m) on a shared grid.
class VectorField {
 public:
  explicit VectorField(std::vector<GridField> components);
  VectorField(const TorusGrid& grid, std::size_t m, double fill = 0.0);

  std::size_t m() const noexcept { return components_.size(); }
  const TorusGrid& grid() const noexcept { return components_.front().grid(); }

  const GridField& operator[](std::size_t i) const noexcept { return components_[i]; }
  GridField& operator[](std::size_t i) noexcept { return components_[i]; }

  auto begin() const noexcept { return components_.begin(); }
  auto end() const noexcept { return components_.end(); }

 private:
  std::vector<GridField> components_;
};

double sup_distance(const VectorField& a, const VectorField& b);

// Periodic multilinear interpolation. Exact at nodes and bounded by the
// stencil's node values.
double interpolate(const GridField& field, const Vec& x);

// Central difference (u[k+1] - u[k-1]) / (2h) per axis.
Vec discrete_gradient(const GridField& field, NodeIndex node);

struct OneSided {
  Vec forward;
  Vec backward;
};

// Forward (u[k+1]-u[k])/h and backward (u[k]-u[k-1])/h per axis.
OneSided one_sided_gradients(const GridField& field, NodeIndex node);

}  // namespace hjsys
