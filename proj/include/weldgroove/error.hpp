#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace weldgroove {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or configuration. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

    /// Same error with `source` (typically a file name) prepended to the message.
    ParseError within(const std::string& source) const { return ParseError(Prefixed{}, source + ": " + what(), line_); }

private:
    struct Prefixed {};
    ParseError(Prefixed, const std::string& what, std::size_t line) : Error(what), line_(line) {}

    std::size_t line_;
};

/// Invalid argument or configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input is well-formed but geometrically degenerate (no groove, no dominant direction, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace weldgroove
