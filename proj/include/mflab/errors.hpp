#pragma once

#include <stdexcept>
#include <string>

namespace mflab {

/// Caller passed arguments that violate an operation's preconditions.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A value failed one of its type invariants (e.g. a probability vector with
/// negative mass beyond the repair tolerance).
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A configuration cannot be run as given (bad config file entry, relaxation
/// constant incompatible with the field's positivity margin, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Something that should be impossible for valid input, such as an
/// infeasible linear program built from a valid label space.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace mflab
