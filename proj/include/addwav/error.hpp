#pragma once

#include <stdexcept>
#include <string>

namespace addwav {

/// Raised when an operation's precondition on its arguments is violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an internal numerical procedure fails to produce a valid result.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A design density evaluated below its declared floor.
class InconsistentDensity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A statistical hypothesis required by a Monte Carlo routine does not hold.
class HypothesisViolated : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested work exceeds the configured observation-replication budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or incomplete configuration / input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace addwav
