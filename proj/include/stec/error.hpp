#pragma once

#include <stdexcept>
#include <string>

namespace stec {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file or unparseable value.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input data violates a documented precondition or invariant.
class DataError : public Error {
public:
    using Error::Error;
};

/// Configuration value out of range or unknown key.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace stec
