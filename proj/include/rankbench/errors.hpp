#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankbench {

// Malformed input text; carries the 1-based line when known (0 otherwise).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A well-formed value that violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The environment or configuration cannot support the request (missing
// runtime binary, bad config values). Never reported as an execution outcome.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Chat endpoint failure after retries were exhausted.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rankbench
