#pragma once

#include <stdexcept>
#include <string>

namespace fieldlab {

// Precondition violations such as bad parameters or invalid brackets are
// reported with std::invalid_argument. The types below cover the two
// other failure classes the batch runner maps onto distinct exit codes.

/// A numerical procedure ran but could not produce a certified result.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computed object violates one of its stated invariants.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace fieldlab
