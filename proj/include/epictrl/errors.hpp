#pragma once

#include <stdexcept>
#include <string>

namespace epictrl {

/// Invalid input data: parameter bounds, malformed scenarios, inadmissible
/// schedules. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numeric failure at runtime: conservation drift, non-finite values,
/// domain errors in special functions. Maps to CLI exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace epictrl
