#pragma once

#include <stdexcept>
#include <string>

namespace fermech {

// Error taxonomy. The CLI maps these onto exit codes:
// ConfigError -> 1, DataError -> 2, NumericError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer dimension mismatches. Messages name both shapes.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid values: bad labels, out-of-range parameters, degenerate vectors.
struct DomainError : Error {
    using Error::Error;
};

// Bad configuration keys or CLI usage.
struct ConfigError : Error {
    using Error::Error;
};

// Missing or ill-formed input files. Messages carry path and row.
struct DataError : Error {
    using Error::Error;
};

// Non-finite values where finite ones are required (e.g. diverged loss).
struct NumericError : Error {
    using Error::Error;
};

// One-line warning to stderr. Output files never receive log text, so
// seeded runs stay byte-identical.
void warn(const std::string& msg);

}  // namespace fermech
