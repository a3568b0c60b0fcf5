#pragma once

#include <stdexcept>
#include <string>

namespace rarelab {

// Input outside the mathematical domain of an operation (negative density, vacuum where
// a finite entropy is required, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Invalid or inconsistent user-facing configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative solve or time integration could not proceed.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rarelab
