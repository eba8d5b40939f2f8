#pragma once

#include <stdexcept>
#include <string>

namespace kroneig {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration (kernel specs, simulation configs).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem or on-disk format failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Inconsistent matrix dimensions, or a size guard refusing the request.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An argument violated a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: indefinite kernel matrix, failed decomposition, non-finite objective.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace kroneig
