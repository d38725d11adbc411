#pragma once

#include <stdexcept>
#include <string>

namespace dbt {

/// Invalid physical or mathematical input (non-positive temperature, NaN, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inconsistent configuration (bad parameter combination, malformed file, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure at runtime (non-convergent quadrature, singular system, ...).
/// The message carries the diagnostics of the failed computation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dbt
