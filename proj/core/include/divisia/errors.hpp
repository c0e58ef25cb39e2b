#pragma once

#include <stdexcept>
#include <string>

namespace divisia {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: files, schemas, configs, bad arguments.
class InputError : public Error {
public:
    using Error::Error;
};

/// Numeric domain violations: closure failures, non-positive values where
/// the logarithmic mean is undefined, incompatible unit dimensions.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failures (missing files, unwritable paths).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace divisia
