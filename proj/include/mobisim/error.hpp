#pragma once

#include <stdexcept>
#include <string>

namespace mobisim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable numeric input to a model operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A value violates a documented constraint. `field()` names the offender.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& constraint)
        : Error(field + " " + constraint), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Equilibrium analysis needs k1 > 0 and k3 > 0.
class DegenerateModelError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    explicit ParseError(const std::string& what) : Error(what) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_ = 0;
    std::size_t column_ = 0;
};

/// Integrator breakdown: non-finite stages, step underflow, step budget exhausted.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double t, double h)
        : Error(what), t_(t), h_(h) {}

    double t() const noexcept { return t_; }
    double h() const noexcept { return h_; }

private:
    double t_;
    double h_;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Calibration problem is ill-posed.
class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Every integration in the initial simplex failed.
class CalibrationStartError : public CalibrationError {
public:
    using CalibrationError::CalibrationError;
};

} // namespace mobisim
