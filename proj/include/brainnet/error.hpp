#pragma once

#include <stdexcept>
#include <string>

namespace brainnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input that parses but violates a documented invariant or precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Iterative method stopped before reaching its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A file could not be opened or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace brainnet
