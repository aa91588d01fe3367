#pragma once

#include <stdexcept>
#include <string>

namespace canard {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// invalid argument for a mathematical operation
class DomainError : public Error {
public:
    using Error::Error;
};

// bad or incomplete user configuration (unknown parameter, empty range, ...)
class ConfigError : public Error {
public:
    using Error::Error;
};

// a numerical procedure could not produce a result
class NumericFailure : public Error {
public:
    using Error::Error;
};

class StiffnessFailure : public NumericFailure {
public:
    StiffnessFailure(const std::string& what, double t) : NumericFailure(what), time(t) {}
    double time;
};

class NonFiniteState : public NumericFailure {
public:
    NonFiniteState(const std::string& what, double t) : NumericFailure(what), time(t) {}
    double time;
};

class NoReturn : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

// chart ordinate too close to zero, the pinch module owns that strip
class PinchZoneInterior : public Error {
public:
    using Error::Error;
};

class TransversalityViolation : public Error {
public:
    TransversalityViolation(const std::string& what, double xi) : Error(what), fibre(xi) {}
    double fibre;
};

class ChatteringError : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

}  // namespace canard
