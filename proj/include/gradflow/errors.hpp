#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradflow {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Expression evaluated outside its domain (log of non-positive, division by zero, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// |v(x)| below the stagnation threshold.
class StagnationError : public Error {
public:
    using Error::Error;
};

// A finite-difference stencil straddles two frame-construction cases.
class CaseInstabilityError : public Error {
public:
    using Error::Error;
};

// Two numerically dependent quantities where independence is required
// (Riccati solutions colliding, parallel Hamiltonian gradients, ...).
class DegeneracyError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace gradflow
