#pragma once

#include <stdexcept>
#include <string>

namespace manidyn {

/// Base class for all runtime failures raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Metric not invertible (or not finite) at an evaluation point.
class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

/// A trajectory or field value left the chart's validity box.
/// `parameter` is the curve parameter (or time) at which the exit occurred.
class ChartExitError : public Error {
public:
    ChartExitError(const std::string& msg, double parameter)
        : Error(msg), parameter(parameter) {}
    double parameter;
};

/// Not enough room for the finite-difference stencil.
class StencilError : public Error {
public:
    using Error::Error;
};

/// Constitutive density evaluated outside its admissible domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A density was asked for second partials it cannot provide.
class NotTwiceDifferentiableError : public Error {
public:
    using Error::Error;
};

/// Explicit time stepper exceeded the blow-up bound.
class UnstableStepError : public Error {
public:
    UnstableStepError(const std::string& msg, int time_index)
        : Error(msg), time_index(time_index) {}
    int time_index;
};

/// Singular linearized system; carries a null-space dimension estimate.
class DegenerateLinearizationError : public Error {
public:
    DegenerateLinearizationError(const std::string& msg, int nullity)
        : Error(msg), nullity(nullity) {}
    int nullity;
};

/// Newton shooting for the inverse exponential map failed to converge.
class ShootingError : public Error {
public:
    using Error::Error;
};

/// Scenario file could not be parsed.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = -1, int column = -1)
        : Error(msg), line(line), column(column) {}
    int line;
    int column;
};

/// Scenario parsed but failed validation; all errors are collected.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> errs)
        : Error(join(errs)), errors(std::move(errs)) {}
    std::vector<std::string> errors;

private:
    static std::string join(const std::vector<std::string>& errs) {
        std::string out = "scenario validation failed:";
        for (const auto& e : errs) out += "\n  - " + e;
        return out;
    }
};

}  // namespace manidyn
