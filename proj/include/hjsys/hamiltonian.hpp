#pragma once

#include <array>
#include <vector>

#include "hjsys/core.hpp"

namespace hjsys {

struct TrigMode {
  std::array<int, 2> wavevector{0, 0};
  double amplitude = 0.0;
  double phase = 0.0;
};

// V(x) = constant + sum_k amplitude_k * cos(2 pi <wavevector_k, x> + phase_k)
class TrigPotential {
 public:
  TrigPotential() = default;
  explicit TrigPotential(double constant, std::vector<TrigMode> modes = {});

  double operator()(const Vec& x) const;

  double constant() const noexcept { return constant_; }
  const std::vector<TrigMode>& modes() const noexcept { return modes_; }

  // constant -/+ sum |amplitude|
  double lower_bound() const noexcept;
  double upper_bound() const noexcept;

 private:
  double constant_ = 0.0;
  std::vector<TrigMode> modes_;
};

// H(x, p) = (c0 / 2) |p|^2 + V(x). Strictly convex and superlinear in p,
// with closed-form Lagrangian and sublevel support function. This is the
// only family shipped; other convex families plug in behind the same four
// member functions.
class HamiltonianComponent {
 public:
  HamiltonianComponent() = default;
  HamiltonianComponent(double kinetic_scale, TrigPotential potential);

  double kinetic_scale() const noexcept { return c0_; }
  const TrigPotential& potential() const noexcept { return potential_; }

  double eval_h(const Vec& x, const Vec& p) const { return 0.5 * c0_ * norm2(p) + potential_(x); }

  // sup_p { p.q - H(x, p) } = |q|^2 / (2 c0) - V(x)
  double eval_lagrangian(const Vec& x, const Vec& q) const { return norm2(q) / (2.0 * c0_) - potential_(x); }

  // Attained at p = 0.
  double min_over_p(const Vec& x) const { return potential_(x); }

  // max { p.q : H(x, p) <= level }. Throws EmptySublevel when level < V(x).
  double support_function(double level, const Vec& x, const Vec& q) const;

  // Same quantity with V(x) already evaluated; `slack` = level - V(x) >= 0.
  double support_from_slack(double slack, const Vec& q) const;

 private:
  double c0_ = 1.0;
  TrigPotential potential_;
};

}  // namespace hjsys
