#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oscgeo {

// Invalid arguments are reported with std::invalid_argument. The types below
// cover the failure classes that the pipeline maps to distinct exit codes.

/// Malformed or unusable input data (exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The optimizer never produced a finite objective (exit code 3).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values inside the filter recursion (exit code 4).
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Statistics that are undefined for the given data (exit code 5).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace oscgeo
