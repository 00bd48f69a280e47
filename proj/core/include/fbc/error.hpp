#pragma once

#include <stdexcept>
#include <string>

namespace fbc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector/matrix/grid sizes disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A caller-supplied parameter is outside its valid range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data violates a structural invariant (bad labels, non-finite values, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed (degenerate covariance, eigen-solver failure, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace fbc
