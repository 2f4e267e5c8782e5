#pragma once

#include <stdexcept>
#include <string>

namespace crashsev {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required column is missing or a schema is malformed.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A cell could not be parsed; the message carries row/column context.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A parsed value violates a domain constraint.
class ValueError : public Error {
public:
    using Error::Error;
};

/// Too few rows for the requested fit or design.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// A design matrix stayed rank-deficient after the ridge retry.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// An invalid operation configuration (overlapping column sets, bad keys, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace crashsev
