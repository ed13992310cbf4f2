#pragma once

#include <stdexcept>
#include <string>

namespace ritzkit {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Requested derivative order exceeds the tabulated tanh derivatives.
class OrderExceeded : public Error {
public:
    using Error::Error;
};

// Invalid input data (non-unit normals, sign-condition audits, bad schemas).
class DataError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Integration or solver breakdown.
class NumericError : public Error {
public:
    using Error::Error;
};

// Gradient-flow step size fell below 1e-12 of the initial step.
class StepUnderflow : public NumericError {
public:
    using NumericError::NumericError;
};

// Too few usable trace records for a rate fit.
class InsufficientTail : public DataError {
public:
    using DataError::DataError;
};

}  // namespace ritzkit
