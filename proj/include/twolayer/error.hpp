#pragma once

#include <stdexcept>
#include <string>

namespace twolayer {

/// Base class for all library failures. The CLI maps each subclass onto an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// Inadmissible parameters, bad configuration values, unknown keys.
class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "validation"; }
};

/// Singular systems, non-finite states, integrator step rejection, negative discriminants.
class NumericalError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numerical"; }
};

/// File system and parse failures.
class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io"; }
};

}  // namespace twolayer
