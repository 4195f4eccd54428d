#pragma once

#include <stdexcept>

namespace umetric {

// Input that could not be parsed or has the wrong shape. The CLI maps these
// to exit code 2.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally malformed data: non-square matrix, asymmetry, duplicate or
// missing labels, negative or zero off-diagonal distances.
struct ShapeError : ParseError {
    using ParseError::ParseError;
};

// A generator spec with out-of-range parameters.
struct InvalidSpecError : ParseError {
    using ParseError::ParseError;
};

// Well-formed input outside an operation's domain. The CLI maps these to
// exit code 1.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The strong triangle inequality failed where an operation requires it.
struct NotUltrametricError : DomainError {
    using DomainError::DomainError;
};

// Exact subset search refused an input larger than its cap.
struct CapExceededError : DomainError {
    using DomainError::DomainError;
};

}  // namespace umetric
