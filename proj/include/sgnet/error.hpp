#pragma once

#include <stdexcept>
#include <string>

namespace sgnet {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform to an operation's shape rule.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A NaN/Inf was produced or supplied, or a value is outside its numeric domain.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed file content; the message names the file and cell.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sgnet
