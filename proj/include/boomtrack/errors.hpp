#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace boomtrack {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing, unreadable, or unwritable files.
class IoError : public Error {
public:
    using Error::Error;
};

// Structurally invalid input. `line` is 1-based when known, 0 otherwise.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

// Input ends before the declared payload does.
class TruncatedError : public FormatError {
public:
    using FormatError::FormatError;
};

// Arguments or records outside their documented domain.
class ValueError : public Error {
public:
    using Error::Error;
};

} // namespace boomtrack
