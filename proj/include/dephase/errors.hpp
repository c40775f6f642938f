#pragma once

#include <stdexcept>
#include <string>

namespace dephase {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract arguments (non-Hermitian matrix, bad
/// dimensions, negative time, unnormalized state, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// A parameter combination the models do not cover, e.g. the partially
/// correlated family with n != 2.
class UnsupportedCase : public Error {
public:
    using Error::Error;
};

/// A closed-form resolution whose argument under the square root is not
/// strictly positive.
class UndefinedResolution : public Error {
public:
    using Error::Error;
};

/// Scalar minimization found no descent inside the bracket.
class FlatFunction : public Error {
public:
    using Error::Error;
};

/// File-system failures (unreadable CSV, unwritable output path).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace dephase
