#pragma once

#include <stdexcept>
#include <string>

namespace dwell {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid arguments, labels, dimensions, or physically inconsistent inputs.
struct DomainError : Error {
    using Error::Error;
};

// Config-file parse or validation failures (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

// Adaptive integration failed (step-size underflow, step budget exhausted).
struct IntegrationError : Error {
    using Error::Error;
};

// Steady-state search did not converge within the time budget.
struct ConvergenceError : Error {
    using Error::Error;
};

// Series evaluation, truncation-tail, or other numeric failures.
struct NumericError : Error {
    using Error::Error;
};

// Problem size exceeds a configured cap.
struct ResourceError : Error {
    using Error::Error;
};

// Filesystem failures (CLI exit code 4).
struct IoError : Error {
    using Error::Error;
};

}  // namespace dwell
