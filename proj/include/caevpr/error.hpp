#pragma once

#include <stdexcept>
#include <string>

namespace caevpr {

// Base of every library error. Derived kinds map onto CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

class DimensionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "dimension"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config"; }
};

class ArchitectureError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "architecture"; }
};

class FormatError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "format"; }
};

class DataError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "data"; }
};

class NumericError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numeric"; }
};

}  // namespace caevpr
