#include "hjsys/hamiltonian.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hjsys/error.hpp"

namespace hjsys {

TrigPotential::TrigPotential(double constant, std::vector<TrigMode> modes)
    : constant_(constant), modes_(std::move(modes)) {}

double TrigPotential::operator()(const Vec& x) const {
  double v = constant_;
  for (const auto& m : modes_) {
    const double arg = 2.0 * std::numbers::pi * (m.wavevector[0] * x[0] + m.wavevector[1] * x[1]) + m.phase;
    v += m.amplitude * std::cos(arg);
  }
  return v;
}

double TrigPotential::lower_bound() const noexcept {
  double s = 0.0;
  for (const auto& m : modes_) s += std::fabs(m.amplitude);
  return constant_ - s;
}

double TrigPotential::upper_bound() const noexcept {
  double s = 0.0;
  for (const auto& m : modes_) s += std::fabs(m.amplitude);
  return constant_ + s;
}

HamiltonianComponent::HamiltonianComponent(double kinetic_scale, TrigPotential potential)
    : c0_(kinetic_scale), potential_(std::move(potential)) {
  if (!(kinetic_scale > 0.0) || !std::isfinite(kinetic_scale)) {
    throw Error(ErrorCode::InvalidArgument, "hamiltonian",
                "kinetic_scale must be positive and finite, got " + std::to_string(kinetic_scale));
  }
}

double HamiltonianComponent::support_function(double level, const Vec& x, const Vec& q) const {
  const double slack = level - potential_(x);
  if (slack < 0.0) {
    throw Error(ErrorCode::EmptySublevel, "hamiltonian",
                "sublevel {H <= " + std::to_string(level) + "} is empty at this point (min_p H = " +
                    std::to_string(level - slack) + ")");
  }
  return support_from_slack(slack, q);
}

double HamiltonianComponent::support_from_slack(double slack, const Vec& q) const {
  // The sublevel is the ball |p| <= sqrt(2 slack / c0).
  return std::sqrt(norm2(q)) * std::sqrt(2.0 * slack / c0_);
}

}  // namespace hjsys
