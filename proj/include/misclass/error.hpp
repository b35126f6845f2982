#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace misclass {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Anything wrong with what the caller handed us: files, flags, schemas.
class InputError : public Error {
public:
    using Error::Error;
};

class SchemaError : public InputError {
public:
    using InputError::InputError;
};

class ParseError : public InputError {
public:
    ParseError(const std::string &what, std::size_t row, std::string column)
        : InputError(what), row_(row), column_(std::move(column)) {}

    // 1-based data row (header is row 0).
    std::size_t row() const noexcept { return row_; }
    const std::string &column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class SingularDesignError : public InputError {
public:
    using InputError::InputError;
};

// A model could not produce a trustworthy answer: non-convergence,
// failed MCMC diagnostics, sampler initialisation failure.
class StatisticalError : public Error {
public:
    using Error::Error;
};

class SamplerInitError : public StatisticalError {
public:
    using StatisticalError::StatisticalError;
};

} // namespace misclass
