#pragma once

#include <stdexcept>
#include <string>

namespace geopg {

/// Invalid argument supplied by the caller (bad probability, index, stepsize...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure at runtime (non-finite state, singular solve, underflow).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested operation is not implemented for this policy/environment kind.
struct CapabilityError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Quantity undefined at the queried point (e.g. score of a zero-probability action).
struct ScoreDomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// The Table-1 schedule cannot be materialized (degenerate CNC, no fixed point).
struct InfeasibleScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace geopg
