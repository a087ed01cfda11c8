#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssc {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point lies outside the admissible domain (e.g. x outside [0, l]).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An argument or construction-time invariant is violated.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A numerical kernel failed (non-convergence, non-finite values).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The time integration blew up.
class DivergenceError : public NumericalError {
public:
    DivergenceError(std::size_t step, double t, double magnitude)
        : NumericalError("simulation diverged at step " + std::to_string(step) + " (t=" +
                         std::to_string(t) + ", |z|=" + std::to_string(magnitude) + ")"),
          step_(step), time_(t) {}

    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

}  // namespace ssc
