#pragma once

#include <stdexcept>
#include <string>

namespace entspec {

// Base class for all library errors so the CLI can map categories to exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller mistakes: bad indices, overlapping registers, non-unitary matrices,
// malformed parameter combinations.
struct ArgumentError : Error {
    using Error::Error;
};

// Circuit/state width mismatch.
struct DimensionError : Error {
    using Error::Error;
};

// Requested object exceeds the qubit cap or a representational bound.
struct ScaleError : Error {
    using Error::Error;
};

// Malformed external input (DIMACS text, config files).
struct FormatError : Error {
    using Error::Error;
};

// A matrix that must be positive semidefinite has a significantly negative
// eigenvalue.
struct NotPSDError : Error {
    using Error::Error;
};

// Mathematically degenerate input: e.g. a clause set no assignment violates,
// so the normalized density matrix does not exist (the count is trivially 2^n).
struct DegenerateError : Error {
    using Error::Error;
};

// An eigenvalue was found inside a window the promise guarantees empty.
struct PromiseViolation : Error {
    using Error::Error;
};

// The counting threshold coincides with a grid point, making the comparison
// bit ill-defined.
struct TieError : Error {
    using Error::Error;
};

// The spectrum cannot be scaled into the phase-estimation window.
struct RangeError : Error {
    using Error::Error;
};

// A readout landed too far from an integer to be trusted.
struct ConfidenceError : Error {
    using Error::Error;
};

// A state-preparation circuit does not produce the state it claims.
struct PrepError : Error {
    using Error::Error;
};

// An amplification input amplitude differs from the required value.
struct AmplitudeError : Error {
    using Error::Error;
};

// A series truncation failed to meet its error bound.
struct TruncationError : Error {
    using Error::Error;
};

}  // namespace entspec
