#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace seldsynth {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input text: wrong arity, non-numeric field, etc.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line) : Error(msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// Well-formed but out-of-contract values (class id 13, elevation 95, ...).
class ValidationError : public Error {
public:
    ValidationError(const std::string& msg, long line = 0) : Error(msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class AssetError : public Error {
public:
    using Error::Error;
};

// A frame sink died mid-clip; carries how many frames made it out.
class SinkError : public Error {
public:
    SinkError(const std::string& msg, std::uint64_t frames_written)
        : Error(msg), frames_written_(frames_written) {}
    std::uint64_t frames_written() const { return frames_written_; }

private:
    std::uint64_t frames_written_;
};

}  // namespace seldsynth
