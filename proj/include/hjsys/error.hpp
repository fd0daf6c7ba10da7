#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace hjsys {

enum class ErrorCode {
  InvalidArgument,
  // coupling
  OffDiagonalPositive,
  RowSumNonzero,
  Reducible,
  NumericalRankDeficiency,
  // hamiltonian
  EmptySublevel,
  // discounted
  MaxIterationsExceeded,
  ComparisonViolated,
  // critical
  NoConvergence,
  LowerBoundViolated,
  SubsolutionConstructionFailed,
  NotConverged,
  // aubry
  RigidityViolated,
  // eikonal
  InfeasibleLevel,
  IncompatibleTrace,
  // cli
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code and the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& what)
      : std::runtime_error(what), code_(code), module_(std::move(module)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace hjsys
