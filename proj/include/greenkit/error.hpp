#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace greenkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed coefficient expression. `position` is a 0-based byte offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class EvalError : public Error {
public:
    using Error::Error;
};

/// Argument outside the interval an object is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or arguments supplied by the caller.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Integrator or linear-algebra failure (step underflow, singular matrices).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The homogeneous problem has a nontrivial solution at `lambda`.
class ResonanceError : public NumericalError {
public:
    ResonanceError(double lambda, double det)
        : NumericalError("resonant problem at lambda = " + std::to_string(lambda) +
                         " (normalized boundary determinant " + std::to_string(det) + ")"),
          lambda_(lambda), det_(det) {}

    double lambda() const noexcept { return lambda_; }
    double determinant() const noexcept { return det_; }

private:
    double lambda_;
    double det_;
};

} // namespace greenkit
