#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace robreg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed numeric input, e.g. NaN or infinite entries.
class InputError : public Error {
public:
    using Error::Error;
};

/// Operation requires state the object does not have (e.g. no ground truth).
class StateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), message_(what), line_(line) {}

    std::size_t line() const noexcept { return line_; }
    /// The message without the line suffix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t line_;
};

}  // namespace robreg
