#pragma once

#include <stdexcept>
#include <string>

namespace optlab {

// Invalid function arguments / configuration.
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& msg) : std::invalid_argument(msg) {}
};

// Quadrature divergence, non-finite intermediates and the like.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Column set of a matrix does not match what the consumer expects.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file content.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that is unusable (e.g. empty after filtering).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Model fitting diverged or could not proceed.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

// Every trial of a hyperparameter search failed.
class TuningError : public std::runtime_error {
public:
    explicit TuningError(const std::string& msg) : std::runtime_error(msg) {}
};

// A metric that has no defined value for the given inputs (e.g. R^2 on a
// constant target).
class UndefinedResult : public std::runtime_error {
public:
    explicit UndefinedResult(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace optlab
