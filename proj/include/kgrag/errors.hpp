#pragma once

#include <stdexcept>
#include <string>

namespace kgrag {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File missing, unreadable, short read/write.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed input line or record. Carries the 1-based line/record number
// when known (0 = unknown).
class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Invalid configuration: bad value, unknown key, dimension mismatch,
// missing prerequisite artifact.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Network-level failure talking to an embedding or chat endpoint.
// Retryable by the caller.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error(msg) {}
};

// Replay-only client saw a request that is not in the store.
class ReplayMissError : public Error {
public:
    explicit ReplayMissError(const std::string& msg) : Error(msg) {}
};

}  // namespace kgrag
