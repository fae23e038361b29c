#pragma once

#include <stdexcept>
#include <string>

namespace hmln {

enum class ErrorKind {
    parse,
    validation,
    io,
    normalization_empty,
    blanket_empty,
    size_limit,
    consistency,
    checkpoint_incompatible,
    numeric,
    invalid_argument,
};

const char* to_string(ErrorKind kind);

/// Base error for everything the engine reports; the kind selects the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line)
        : Error(ErrorKind::parse, message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace hmln
