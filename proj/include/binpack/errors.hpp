#pragma once

#include <stdexcept>
#include <string>

namespace binpack {

// Bad user input: malformed distributions, scenario files, CLI arguments.
// The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal bookkeeping contradiction. Exit code 3 in the CLI.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resource guard tripped (state-space or enumeration bound). Exit code 4.
struct ExplosionGuard : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IllegalPlacement : InvariantError {
  using InvariantError::InvariantError;
};

struct UnknownBin : InvariantError {
  using InvariantError::InvariantError;
};

struct UnknownItem : InvariantError {
  using InvariantError::InvariantError;
};

struct InvalidHorizon : ValidationError {
  using ValidationError::ValidationError;
};

struct InfeasibleInitial : ValidationError {
  using ValidationError::ValidationError;
};

struct EmptyPhaseList : ValidationError {
  using ValidationError::ValidationError;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace binpack
