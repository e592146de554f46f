#pragma once

#include <stdexcept>
#include <string>

namespace scooterx {

// Precondition violated by a caller-supplied value (bad geometry, non-positive
// distance, unknown enum name, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent external data: trace files, sample CSVs, configs.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An internal invariant failed; indicates a bug rather than bad input.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace scooterx
