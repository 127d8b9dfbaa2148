#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace popsim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed protocol source. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// The configuration cannot supply the requested ordered pair of agents.
class InvalidDrawError : public Error {
public:
    using Error::Error;
};

class EmptyPopulationError : public Error {
public:
    EmptyPopulationError() : Error("population is empty") {}
};

/// distinct_visitors() was asked about a state the run did not audit.
class MissingAuditError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// A closed-form bound evaluated to a non-positive (vacuous) value.
class VacuousBoundError : public Error {
public:
    VacuousBoundError(const std::string& message, std::string raw_value)
        : Error(message + " (raw value " + raw_value + ")"), raw_value_(std::move(raw_value)) {}

    const std::string& raw_value() const noexcept { return raw_value_; }

private:
    std::string raw_value_;
};

} // namespace popsim
