#pragma once

#include <stdexcept>
#include <string>

namespace kubolab {

/// Argument outside the mathematical domain of an operation (site outside a box, N too large, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Requested object too large to build at desk scale.
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Model specification violates a structural requirement (non-Hermitian stencil, ...).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An operation's precondition does not hold numerically.
class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Gap assumption violated: degenerate ground state, Fermi level inside a band, closed gap.
class GapError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Eigen- or time-integration failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace kubolab
