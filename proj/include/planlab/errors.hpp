#pragma once

#include <stdexcept>
#include <string>

namespace planlab {

/// Malformed input file (bad syntax, wrong types, truncation).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Structurally valid input that violates a domain invariant; the message
/// names the invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration (unsupported option, inconsistent values).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace planlab
