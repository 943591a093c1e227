#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace tmkernel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad inputs: malformed files, shape mismatches, invalid parameters.
/// The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A computation that could not be completed numerically.
/// The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Euler-Maruyama produced a non-finite coordinate.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, long step)
        : NumericalError(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Warnings do not abort; they go to a process-wide sink (stderr by default).
using WarningHandler = std::function<void(const std::string&)>;

void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace tmkernel
