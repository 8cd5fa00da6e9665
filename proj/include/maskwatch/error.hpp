#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maskwatch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input. Carries the 1-based line and the offending field when known.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string field, const std::string& what)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

} // namespace maskwatch
